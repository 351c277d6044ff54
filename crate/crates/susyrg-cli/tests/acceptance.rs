//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::Instant;

use susyrg_cli::verify::run_suite;
use susyrg_cli::Suite;
use susyrg_core::{Parameters, Site};
use susyrg_covariance::{
    decompose, support_radius, window_scale, DecompositionSet, QuadratureSpec, Strategy,
    Subordination, TimeBound,
};
use susyrg_critical::{
    exit_after_perturbation, lipschitz_samples, shoot_bisection, solve_backward_sum,
    solve_contraction,
};
use susyrg_flowcoeffs::{
    coefficient_decomposition, coefficients_from, flow_coefficients, v_kernels, FlowCoefficients,
};
use susyrg_perturbation::extract_fq;
use susyrg_polymer::{closure_scan, polymer_counts};
use susyrg_rgflow::{g_bar, iterate_reference, reference_step, Flow};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn decomposition_contract() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [0.1, 0.5] {
        let p = Parameters::new(3, eps).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let d = decompose(&p, 6, Strategy::SpectralWindow, 1e-6).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let mut outside = 0usize;
        for (n, g) in d.gammas.iter().enumerate() {
            let r = support_radius(3, n as u32);
            outside += g
                .keys()
                .into_iter()
                .filter(|k| k[0] > r && g.at(*k) != 0.0)
                .count();
        }
        let recursion = d
            .residual_report
            .iter()
            .map(|e| e.recursion_residual)
            .fold(0.0, f64::max);
        ok &= d.reconstruction_residual < 1e-6 && outside == 0 && recursion < 1e-8 && secs < 120.0;
        parts.push(format!(
            "eps={eps}: reconstruction {:.1e}, recursion {recursion:.1e}, nonzero beyond range {outside}, {secs:.1}s",
            d.reconstruction_residual
        ));
    }
    require(ok, parts.join("; "))
}

/// Σ over the unit cube of C_{0,L}² − C_1², straight from the time integral.
fn brute_force_a0(p: &Parameters) -> f64 {
    let t1 = window_scale(Strategy::SpectralWindow) * (p.l * p.l) as f64;
    let q = Subordination::new(p.alpha(), 1, &[t1], QuadratureSpec::default()).expect("quadrature");
    let up = p.lf().powf(2.0 * p.d_s());
    let mut sum = 0.0;
    for a in -1i64..=1 {
        for b in -1i64..=1 {
            for c in -1i64..=1 {
                let ws = q.window_sums([a, b, c]).expect("window sums");
                let c0 = ws.total();
                let c1 = ws.integral(TimeBound::Break(1), TimeBound::Infinity);
                sum += (up * c0).powi(2) - (up * c1).powi(2);
            }
        }
    }
    4.0 * sum / 27.0
}

fn differences(a: &[f64]) -> Vec<f64> {
    a.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn coefficient_law(dec: &DecompositionSet, c: &FlowCoefficients) -> Outcome {
    let positive = c.a.iter().chain(&c.b).all(|&v| v > 0.0);
    let da = differences(&c.a);
    let decreasing = da.windows(2).all(|w| w[1] < w[0]);
    let brute = brute_force_a0(&dec.params);
    let rel = (brute - c.a[0]).abs() / brute;
    let detail = format!(
        "eps={}: positive {positive}, |a_(n+1) - a_n| = {} decreasing {decreasing}, fit rate {:.3}, a_0 oracle rel diff {rel:.1e}",
        dec.params.eps,
        sci(&da),
        c.decay_fit
    );
    require(
        positive && decreasing && c.decay_fit > 0.0 && rel < 1e-12,
        detail,
    )
}

fn fixed_point(f: &Flow) -> Outcome {
    let p = &f.params;
    let a = f.coeffs.a_star;
    let closed = (p.lf().powf(p.eps) - 1.0) / (p.lf().powf(2.0 * p.eps) * a);
    let gb = g_bar(p, a).map_err(|e| e.to_string())?;
    let mut worst_steps = 0;
    let mut all = true;
    for k in 1..20 {
        let g0 = gb * (0.5 + k as f64 / 20.0);
        match iterate_reference(g0, p, a, 1e-12, 5000)
            .map_err(|e| e.to_string())?
            .converged_at
        {
            Some(s) => worst_steps = worst_steps.max(s),
            None => all = false,
        }
    }
    let h = 1e-5 * gb;
    let fd = (reference_step(gb + h, p, a) - reference_step(gb - h, p, a)) / (2.0 * h);
    let mult = (fd - (2.0 - p.lf().powf(p.eps))).abs();
    let formula = (gb - closed).abs() / closed;
    require(
        all && mult < 1e-8 && formula < 1e-15,
        format!("19 starts in (g/2, 3g/2) reach 1e-12 (at most {worst_steps} steps), multiplier error {mult:.1e}, g_bar vs closed form {formula:.1e}"),
    )
}

fn critical_triple(f: &Flow) -> Outcome {
    let g0 = f.params.nu * f.g_bar / 40.0;
    let w = f.g_bar.powf(2.0 - f.params.delta_exp);
    let bs = solve_backward_sum(f, g0, 0, 40, 1e-12).map_err(|e| e.to_string())?;
    let co = solve_contraction(f, g0, 0, 40, 1e-15).map_err(|e| e.to_string())?;
    let bi = shoot_bisection(f, g0, 0, 40, (-w, w)).map_err(|e| e.to_string())?;
    let mus = [bs.mu_critical, co.mu_critical, bi.mu_critical];
    let mut rel: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            rel = rel.max((mus[i] - mus[j]).abs() / mus[i].abs().max(mus[j].abs()));
        }
    }
    let in_domain = co.trajectory.first_exit(f).is_none() && co.trajectory.states.len() == 41;
    let band = co.trajectory.band_entry(f, f.params.nu / 4.0);
    let exit = exit_after_perturbation(f, &co, 1e-6 * w).exit_steps;
    require(
        rel < 1e-8 && in_domain && band.is_some() && exit.is_some_and(|s| s <= 15),
        format!("mu_c = {:.10e}, max relative difference {rel:.1e}, in domain {in_domain}, band entry {band:?}, exit after {exit:?} steps", mus[0]),
    )
}

fn contraction_evidence(f: &Flow) -> Outcome {
    let r = lipschitz_samples(f, f.params.nu * f.g_bar / 40.0, 0, 40, 20, 0.25, 2024);
    let note = if r.max > 0.5 {
        " (WARN: above 1/2)"
    } else {
        ""
    };
    require(
        r.ratios.len() == 20 && r.max <= 0.9,
        format!("max ratio {:.4} over 20 pairs at eps=0.05{note}", r.max),
    )
}

fn suite_outcome(suites: &[Suite], limit_secs: Option<f64>) -> (bool, Vec<String>) {
    let start = Instant::now();
    let mut ok = true;
    let mut failed = Vec::new();
    let mut n = 0;
    for &s in suites {
        let r = run_suite(s);
        n += r.checks.len();
        ok &= r.passed();
        failed.extend(
            r.checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{}/{}: {}", c.suite, c.name, c.detail)),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    if let Some(l) = limit_secs {
        ok &= secs < l;
    }
    let mut lines = vec![format!("{n} checks in {secs:.1}s")];
    lines.extend(failed);
    (ok, lines)
}

fn susy_exactness() -> Outcome {
    let (ok, lines) = suite_outcome(&[Suite::Susy], Some(60.0));
    require(ok, lines.join("; "))
}

fn second_order_matching(dec: &DecompositionSet) -> Outcome {
    let (mut ok, mut lines) = suite_outcome(&[Suite::Matching, Suite::Localization], None);
    let p = &dec.params;
    let g = 0.3 * p.lf().powf(p.eps);
    for n in 0..=1 {
        let v = v_kernels(dec, n).map_err(|e| e.to_string())?;
        let e = extract_fq(&v, p, g).map_err(|e| e.to_string())?;
        let (a, b) = coefficients_from(&v);
        let good = e.check(a, b, 1e-10).is_ok();
        ok &= good;
        lines.push(format!(
            "extract n={n}: ({:.6e}, {:.6e}) vs ({:.6e}, {:.6e})",
            e.coefficients[0],
            e.coefficients[1],
            a * g * g,
            b * g * g
        ));
    }
    require(ok, lines.join("; "))
}

/// Connected k-subsets with the origin as smallest block, by direct choice
/// and flood fill.
fn flood_fill_count(k: usize) -> u64 {
    let r = k as i64 - 1;
    let mut cells = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                if [x, y, z] > [0, 0, 0] {
                    cells.push([x, y, z]);
                }
            }
        }
    }
    fn connected(set: &[Site]) -> bool {
        let mut reached = HashSet::from([set[0]]);
        let mut stack = vec![set[0]];
        while let Some(c) = stack.pop() {
            for &d in set {
                if !reached.contains(&d) && (0..3).all(|a| (c[a] - d[a]).abs() <= 1) {
                    reached.insert(d);
                    stack.push(d);
                }
            }
        }
        reached.len() == set.len()
    }
    fn choose(cells: &[Site], start: usize, left: usize, chosen: &mut Vec<Site>, count: &mut u64) {
        if left == 0 {
            if connected(chosen) {
                *count += 1;
            }
            return;
        }
        for i in start..cells.len() {
            chosen.push(cells[i]);
            choose(cells, i + 1, left - 1, chosen, count);
            chosen.pop();
        }
    }
    let mut count = 0;
    choose(&cells, 0, k - 1, &mut vec![[0, 0, 0]], &mut count);
    count
}

fn polymer_geometry() -> Outcome {
    let start = Instant::now();
    let r = closure_scan(7, 9, 1, (9, 24), 20, 3).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let counts = polymer_counts(4);
    let oracle: Vec<u64> = (1..=4).map(flood_fill_count).collect();
    let ok =
        r.max_ratio_small_family.is_finite() && r.large_gain_holds && counts[1..] == oracle[..];
    require(
        ok,
        format!(
            "max ratio {} over sizes <= 7 ({secs:.1}s), large family ({} polymers, sizes 9..=24) max ratio*L^4 {:.3}, counts {:?} vs flood fill {oracle:?}",
            r.max_ratio_small_family,
            r.large.polymers,
            r.large.max_scaled_ratio,
            &counts[1..]
        ),
    )
}

fn flow_for(eps: f64) -> Result<(DecompositionSet, Flow), String> {
    let p = Parameters::new(3, eps).map_err(|e| e.to_string())?;
    let dec =
        coefficient_decomposition(&p, Strategy::SpectralWindow, 4).map_err(|e| e.to_string())?;
    let c = flow_coefficients(&dec, 0..=4).map_err(|e| e.to_string())?;
    let f = Flow::new(p, c).map_err(|e| e.to_string())?;
    Ok((dec, f))
}

fn main() -> ExitCode {
    let flows: Result<Vec<(DecompositionSet, Flow)>, String> =
        [0.5, 0.1, 0.05].into_iter().map(flow_for).collect();
    let flows = match flows {
        Ok(f) => f,
        Err(e) => {
            println!("setup failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let (dec_half, flow_half) = &flows[0];
    let (_, flow_tenth) = &flows[1];
    let (_, flow_twentieth) = &flows[2];

    let criteria: Vec<Criterion> = vec![
        ("decomposition contract", Box::new(decomposition_contract)),
        (
            "coefficient law",
            Box::new(|| coefficient_law(dec_half, &flow_half.coeffs)),
        ),
        ("fixed point", Box::new(|| fixed_point(flow_tenth))),
        (
            "critical mass triple agreement",
            Box::new(|| critical_triple(flow_tenth)),
        ),
        (
            "contraction evidence",
            Box::new(|| contraction_evidence(flow_twentieth)),
        ),
        ("supersymmetry exactness", Box::new(susy_exactness)),
        (
            "second-order matching",
            Box::new(|| second_order_matching(dec_half)),
        ),
        ("polymer geometry", Box::new(polymer_geometry)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(d) => println!("criterion {} {name}: PASS ({d})", i + 1),
            Err(d) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({d})", i + 1);
            }
        }
    }
    let small_eps = differences(&flow_tenth.coeffs.a);
    println!(
        "note: at eps=0.1 the exact differences |a_(n+1) - a_n| are {}",
        sci(&small_eps)
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
