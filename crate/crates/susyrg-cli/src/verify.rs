//! Identity suites run by `susyrg verify`.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use susyrg_core::Parameters;
use susyrg_covariance::{decompose_with, DecomposeOptions, Strategy};
use susyrg_perturbation::{
    evaluate_bosonic, f_q, f_q_localized, hat_x, localization_check, localization_identities, Toy,
};
use susyrg_polymer::{closure_scan, polymer_counts};
use susyrg_superalgebra::{
    operator_identity_d, phi_phibar, ratio, super_pair, susy_integral_check, Element, Kind,
    Rational, Scalar, SiteSet, Var,
};

type Q = Rational;
type E = Element<Q>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Susy,
    Localization,
    Matching,
    Polymer,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Susy => "susy",
            Suite::Localization => "localization",
            Suite::Matching => "matching",
            Suite::Polymer => "polymer",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "susy" => Ok(Suite::Susy),
            "localization" => Ok(Suite::Localization),
            "matching" => Ok(Suite::Matching),
            "polymer" => Ok(Suite::Polymer),
            "all" => Ok(Suite::All),
            _ => Err(format!(
                "unknown suite {s:?} (expected susy, localization, matching, polymer or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, suite: &'static str, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            suite,
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

pub fn run_suite(suite: Suite) -> VerifyReport {
    let mut r = VerifyReport::default();
    match suite {
        Suite::Susy => susy(&mut r),
        Suite::Localization => localization(&mut r),
        Suite::Matching => matching(&mut r),
        Suite::Polymer => polymer(&mut r),
        Suite::All => {
            susy(&mut r);
            localization(&mut r);
            matching(&mut r);
            polymer(&mut r);
        }
    }
    r
}

fn q(p: i64, d: i64) -> Q {
    ratio(p, d)
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// B Bᵀ + I/2 with small rational entries.
fn gram(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Q>> {
    let b: Vec<Vec<Q>> = (0..n)
        .map(|_| (0..n).map(|_| q(rng.gen_range(-3..=3), 4)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { q(1, 2) } else { q(0, 1) };
                    (0..n).fold(d, |acc, k| acc + b[i][k].clone() * b[j][k].clone())
                })
                .collect()
        })
        .collect()
}

fn sites(n: usize) -> Vec<[i64; 3]> {
    (0..n).map(|i| [i as i64, 0, 0]).collect()
}

fn v(x: Var) -> E {
    E::var(x)
}

fn rand_element(rng: &mut ChaCha8Rng, n: usize, terms: usize, degree: usize) -> E {
    (0..terms).fold(E::zero(), |acc, _| {
        let d = rng.gen_range(0..=degree);
        let m = (0..d).fold(E::constant(rand_q(rng)), |m, _| {
            let kind = [Kind::Phi, Kind::PhiBar, Kind::Psi, Kind::PsiBar][rng.gen_range(0..4)];
            m.mul(&v(Var::new(kind, 0, rng.gen_range(0..n))))
        });
        acc.add(&m)
    })
}

fn rand_gauge_invariant(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> E {
    (0..terms).fold(E::zero(), |acc, _| {
        let k = rng.gen_range(0..=2);
        let t = (0..k).fold(E::constant(rand_q(rng)), |m, _| {
            let x = if rng.gen_bool(0.5) {
                Var::phi(rng.gen_range(0..n))
            } else {
                Var::psi(rng.gen_range(0..n))
            };
            let y = if rng.gen_bool(0.5) {
                Var::phibar(rng.gen_range(0..n))
            } else {
                Var::psibar(rng.gen_range(0..n))
            };
            m.mul(&v(x).mul(&v(y)))
        });
        acc.add(&t)
    })
}

/// Polynomials in Φ(a)Φ̄(b) plus the Q-image of an odd gauge-invariant element.
fn rand_susy(rng: &mut ChaCha8Rng, n: usize) -> E {
    let mut e = E::constant(rand_q(rng));
    for _ in 0..4 {
        let k = rng.gen_range(1..=2);
        let t = (0..k).fold(E::constant(rand_q(rng)), |m, _| {
            m.mul(&super_pair(0, rng.gen_range(0..n), rng.gen_range(0..n)))
        });
        e = e.add(&t);
    }
    let odd = v(Var::psi(rng.gen_range(0..n)))
        .mul(&v(Var::phibar(rng.gen_range(0..n))))
        .mul(&super_pair(0, rng.gen_range(0..n), rng.gen_range(0..n)))
        .scale(&rand_q(rng));
    e.add(&odd.susy_q())
}

fn susy(r: &mut VerifyReport) {
    const S: &str = "susy";
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
    let c = gram(&mut rng, 4);
    let set = SiteSet::new(sites(4), c.clone()).expect("gram matrix is positive definite");

    let mut ok = 0;
    for _ in 0..10 {
        let e = rand_susy(&mut rng, 4);
        if susy_integral_check(&e, &set)
            .map(|s| s.equal)
            .unwrap_or(false)
        {
            ok += 1;
        }
    }
    r.push(
        S,
        "integral-localizes",
        ok == 10,
        format!("{ok}/10 supersymmetric elements integrate to their value at zero (rational)"),
    );

    let mut ok = 0;
    for _ in 0..20 {
        let e = rand_gauge_invariant(&mut rng, 4, 6);
        if e.is_gauge_invariant() && e.susy_q().susy_q().is_empty() {
            ok += 1;
        }
    }
    let charged = v(Var::phi(0)).mul(&v(Var::psi(1)));
    let charge_ok = charged.susy_q().susy_q() == charged.scale(&q(2, 1));
    r.push(
        S,
        "q-squared",
        ok == 20 && charge_ok,
        format!("Q² = 0 on {ok}/20 gauge-invariant elements; Q² = charge on φψ: {charge_ok}"),
    );

    let mut ok = 0;
    for _ in 0..10 {
        let (d, qlq) = operator_identity_d(&rand_element(&mut rng, 3, 8, 4));
        if d == qlq {
            ok += 1;
        }
    }
    r.push(
        S,
        "dilation",
        ok == 10,
        format!("D = (QL + LQ)/2 on {ok}/10 random elements"),
    );

    let zero = q(0, 1);
    let prod = super_pair::<Q>(0, 0, 1)
        .mul(&super_pair(0, 2, 3))
        .mul(&super_pair(0, 3, 0));
    let e1 = set.expectation(&super_pair(0, 0, 3));
    let e3 = set.expectation(&prod);
    let ok = e1.as_ref().ok() == Some(&zero) && e3.as_ref().ok() == Some(&zero);
    r.push(S, "superfield-products", ok, "E(ΦΦ̄) = E((ΦΦ̄)³) = 0");

    let (x1, y1, x2, y2) = (0, 2, 3, 1);
    let two = v(Var::psibar(x1)).mul(&v(Var::psi(y1)));
    let four = two.mul(&v(Var::psibar(x2))).mul(&v(Var::psi(y2)));
    let det = c[x1][y1].clone() * c[x2][y2].clone() - c[x1][y2].clone() * c[x2][y1].clone();
    let ok = set.expectation(&two).ok() == Some(c[x1][y1].clone())
        && set.expectation(&four).ok() == Some(det);
    r.push(
        S,
        "fermion-determinant",
        ok,
        "E(ψ̄ψ) = C and E(ψ̄ψψ̄ψ) = det C",
    );

    let pairing = v(Var::phi(0))
        .mul(&v(Var::phi(1)))
        .mul(&v(Var::phibar(1)))
        .mul(&v(Var::phibar(2)));
    let want = c[0][1].clone() * c[1][2].clone() + c[0][2].clone() * c[1][1].clone();
    let p: E = phi_phibar(2);
    let c0 = c[2][2].clone();
    let p2 = p.mul(&p);
    let wick2 = p2.wick_order(0, &c) == p2.sub(&p.scale(&(q(2, 1) * c0.clone())));
    let wick1 = [v(Var::phi(2)), v(Var::psi(2))].iter().all(|a| {
        let e = p.mul(a);
        e.wick_order(0, &c) == e.sub(&a.scale(&c0))
    });
    let ok =
        set.expectation(&pairing).ok() == Some(want) && wick2 && wick1 && p.wick_order(0, &c) == p;
    r.push(
        S,
        "wick",
        ok,
        "boson pairing sum and Wick ordering of (ΦΦ̄), (ΦΦ̄)², (ΦΦ̄)φ, (ΦΦ̄)ψ",
    );

    match float_integral_check(&mut rng) {
        Ok(worst) => r.push(
            S,
            "float-mode",
            worst <= 1e-12,
            format!("relative deviation {worst:.2e} with the scale-0 fluctuation covariance"),
        ),
        Err(e) => r.push(S, "float-mode", false, e),
    }
}

/// Localization of supersymmetric integrals in f64 on four sites of the scale-0 fluctuation covariance.
fn float_integral_check(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let p = Parameters::new(3, 0.5).map_err(|e| e.to_string())?;
    let opts = DecomposeOptions {
        extent: 10,
        ..Default::default()
    };
    let dec =
        decompose_with(&p, 1, Strategy::SpectralWindow, 1e-6, &opts).map_err(|e| e.to_string())?;
    let pts = vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]];
    let s = SiteSet::<f64>::from_kernel(pts, &dec.gammas[0]).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let e = rand_susy(rng, 4).to_f64();
        let c = susy_integral_check(&e, &s).map_err(|e| e.to_string())?;
        worst = worst.max((c.lhs - c.rhs).abs() / e.max_abs().max(1.0));
    }
    Ok(worst)
}

fn localization(r: &mut VerifyReport) {
    const S: &str = "localization";
    let mut rng = ChaCha8Rng::seed_from_u64(0x10c);
    let samples: Vec<(Complex64, Complex64)> = (0..100)
        .map(|_| {
            let mut z = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            (z(), z())
        })
        .collect();
    let rep = localization_check(&samples);
    r.push(
        S,
        "complex-samples",
        rep.max_residual < 1e-12,
        format!(
            "max residual {:.2e} on {} samples",
            rep.max_residual, rep.samples
        ),
    );

    let mut ok = true;
    for _ in 0..20 {
        let mut x = || rand_q(&mut rng);
        let (phi, phibar) = ([x(), x()], [x(), x()]);
        for (l, rhs) in localization_identities::<Q>() {
            ok &= evaluate_bosonic(&l, &phi, &phibar) == evaluate_bosonic(&rhs, &phi, &phibar);
        }
    }
    r.push(
        S,
        "rational-samples",
        ok,
        "both identities exact at 20 rational points with independent conjugates",
    );
}

/// A Aᵀ + n·I with small integer entries, divided by `den`.
fn integer_gram(rng: &mut ChaCha8Rng, n: usize, den: i64) -> Vec<Vec<Q>> {
    let a: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: i64 = (0..n).map(|k| a[i][k] * a[j][k]).sum::<i64>()
                        + if i == j { n as i64 } else { 0 };
                    q(s, den)
                })
                .collect()
        })
        .collect()
}

fn toy(blocks: Vec<Vec<usize>>, seed: u64) -> Toy<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = blocks.iter().map(Vec::len).sum();
    let gamma = integer_gram(&mut rng, n, 5);
    let c = integer_gram(&mut rng, n, 7);
    Toy::new(blocks, q(1, 8), gamma, c).expect("valid toy")
}

fn matching(r: &mut VerifyReport) {
    const S: &str = "matching";
    let shapes = [
        vec![vec![0, 1]],
        vec![vec![0], vec![1]],
        vec![vec![0, 1, 2]],
        vec![vec![0, 1], vec![2, 3]],
    ];
    for (i, blocks) in shapes.into_iter().enumerate() {
        let name = format!("toy-{blocks:?}").replace(' ', "");
        match toy(blocks, 100 + i as u64).second_order_matching(&q(2, 3)) {
            Ok(m) => r.push(
                S,
                &name,
                m.residual == 0.0 && !m.lhs.is_empty(),
                format!("rational residual {}", m.residual),
            ),
            Err(e) => r.push(S, &name, false, e.to_string()),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xf1);
    let f = |m: Vec<Vec<Q>>| -> Vec<Vec<f64>> {
        m.iter()
            .map(|row| row.iter().map(Scalar::to_f64).collect())
            .collect()
    };
    let g = f(integer_gram(&mut rng, 3, 5));
    let c = f(integer_gram(&mut rng, 3, 7));
    match Toy::new(vec![vec![0], vec![1, 2]], 1.0 / 27.0, g, c)
        .and_then(|t| t.second_order_matching(&0.7))
    {
        Ok(m) => {
            let rel = m.residual / m.lhs.max_abs();
            r.push(
                S,
                "float-toy",
                rel <= 1e-10,
                format!("relative residual {rel:.2e}"),
            )
        }
        Err(e) => r.push(S, "float-toy", false, e.to_string()),
    }

    let t = toy(vec![vec![0], vec![1, 2]], 131);
    let w = susyrg_perturbation::v_matrices(&t.gamma, &t.c_next);
    let xhat = hat_x(&t.blocks);
    let fq = f_q(&xhat, &t.weight, &w, &t.c_next, &q(5, 4));
    let ok = fq
        .sub(&f_q_localized(&xhat, &t.weight, &w, &t.c_next, &q(5, 4)))
        .is_empty()
        && fq.constant_term().is_zero();
    r.push(
        S,
        "f-q-localizes",
        ok,
        "Q̃ − Q equals its localized (ΦΦ̄), (ΦΦ̄)² form exactly",
    );
}

/// Lattice-animal counts in three dimensions with 26-neighbor connectivity.
const KNOWN_COUNTS: [u64; 4] = [1, 13, 237, 4995];

fn polymer(r: &mut VerifyReport) {
    const S: &str = "polymer";
    let counts = polymer_counts(4);
    r.push(
        S,
        "counts",
        counts[1..] == KNOWN_COUNTS,
        format!("sizes 1..=4: {:?}", &counts[1..]),
    );
    match closure_scan(6, 9, 1, (9, 12), 5, 7) {
        Ok(rep) => {
            let closures = rep.rows.iter().all(|row| row.max_closure == row.size);
            let ok = rep.max_ratio_small_family.is_finite() && rep.large_gain_holds && closures;
            r.push(
                S,
                "closure-scan",
                ok,
                format!(
                    "max ratio {} up to size 6, large family max ratio·L⁴ {:.3}",
                    rep.max_ratio_small_family, rep.large.max_scaled_ratio
                ),
            )
        }
        Err(e) => r.push(S, "closure-scan", false, e.to_string()),
    }
}
