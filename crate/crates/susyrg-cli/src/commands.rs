use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::Serialize;
use serde_json::json;
use susyrg_covariance::cache::{decode, decode_header, TableCache};
use susyrg_covariance::{
    decompose_with, params_hash, support_radius, DecomposeOptions, DecompositionSet, KernelTable,
};
use susyrg_critical::{
    shoot_bisection, solve_backward_sum, solve_contraction, CriticalRecord, CriticalSolution,
    Method,
};
use susyrg_flowcoeffs::{flow_coefficients, FlowCoefficients};
use susyrg_rgflow::{write_trajectory_csv, Flow, FlowState};

use crate::verify::{run_suite, Suite, VerifyReport};
use crate::{comment_line, CliError, RunConfig, VERSION};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    /// Tables produced by a fresh decomposition.
    pub computed: usize,
    pub files: Vec<PathBuf>,
}

fn cache_error(path: &Path, reason: impl ToString) -> CliError {
    CliError::Cache {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Reads a cached table and checks its header against the expected scale,
/// extent and parameters. `Ok(None)` when the file does not exist.
fn load_table(
    path: &Path,
    cfg: &RunConfig,
    n: u32,
    extent: u32,
    support: Option<u32>,
    hash: &str,
) -> Result<Option<KernelTable>, CliError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(cache_error(path, e)),
    };
    let (h, _) = decode_header(&bytes).map_err(|e| cache_error(path, e))?;
    let want = (cfg.l, n, cfg.strategy.id(), cfg.eps.to_bits(), extent);
    if (h.l, h.n, h.strategy, h.eps.to_bits(), h.extent) != want {
        return Err(cache_error(
            path,
            format!(
                "header {h:?} does not match L = {}, n = {n}, eps = {}, extent = {extent}",
                cfg.l, cfg.eps
            ),
        ));
    }
    decode(&bytes, support, hash)
        .map(Some)
        .map_err(|e| cache_error(path, e))
}

/// Decomposition to depth `n_max`, read from the cache when every table is
/// present and computed (then stored) otherwise.
pub fn load_or_decompose(
    cfg: &RunConfig,
    n_max: u32,
    opts: &DecomposeOptions,
) -> Result<(DecompositionSet, CacheStats), CliError> {
    let params = cfg.parameters()?;
    let cache = TableCache::new(&cfg.cache_dir).map_err(|e| cache_error(&cfg.cache_dir, e))?;
    let hash = params_hash(&params, cfg.strategy);
    let gamma_kind = format!("gamma-m{n_max}");
    let direct_kind = format!("direct-m{n_max}");
    let gamma_paths: Vec<PathBuf> = (0..=n_max)
        .map(|n| cache.path(&gamma_kind, &params, cfg.strategy, n, opts.extent))
        .collect();
    let direct_paths: Vec<PathBuf> = (0..=n_max + 1)
        .map(|n| cache.path(&direct_kind, &params, cfg.strategy, n, opts.extent))
        .collect();
    let files: Vec<PathBuf> = gamma_paths.iter().chain(&direct_paths).cloned().collect();

    let mut gammas = Vec::new();
    for (n, p) in gamma_paths.iter().enumerate() {
        gammas.push(load_table(
            p,
            cfg,
            n as u32,
            opts.extent,
            Some(support_radius(cfg.l, n as u32)),
            &hash,
        )?);
    }
    let mut direct = Vec::new();
    for (n, p) in direct_paths.iter().enumerate() {
        direct.push(load_table(p, cfg, n as u32, opts.extent, None, &hash)?);
    }
    if gammas.iter().chain(&direct).all(Option::is_some) {
        let hits = files.len();
        info!(
            "cache: {hits} hits, 0 tables computed ({})",
            cache.dir.display()
        );
        let gammas = gammas.into_iter().flatten().collect();
        let direct = direct.into_iter().flatten().collect();
        let dec = DecompositionSet::from_tables(
            &params,
            cfg.strategy,
            cfg.tol_decompose,
            opts,
            gammas,
            direct,
        )?;
        return Ok((
            dec,
            CacheStats {
                hits,
                computed: 0,
                files,
            },
        ));
    }

    let hits = gammas.iter().chain(&direct).filter(|t| t.is_some()).count();
    let dec = decompose_with(&params, n_max, cfg.strategy, cfg.tol_decompose, opts)?;
    for (p, t) in gamma_paths
        .iter()
        .zip(&dec.gammas)
        .chain(direct_paths.iter().zip(&dec.direct))
    {
        cache.store(p, t).map_err(|e| cache_error(p, e))?;
    }
    let computed = files.len();
    info!(
        "cache: {hits} hits, {computed} tables computed ({})",
        cache.dir.display()
    );
    Ok((
        dec,
        CacheStats {
            hits,
            computed,
            files,
        },
    ))
}

fn create_output_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct DecomposeOutcome {
    pub report: PathBuf,
    pub cache: CacheStats,
    pub reconstruction_residual: f64,
}

/// Builds or loads the decomposition to depth n_max and writes `decompose.json`.
pub fn cmd_decompose(cfg: &RunConfig) -> Result<DecomposeOutcome, CliError> {
    let (dec, cache) = load_or_decompose(cfg, cfg.n_max, &cfg.decompose_options())?;
    create_output_dir(cfg)?;
    let residuals: Vec<_> = dec
        .residual_report
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "recursion_residual": e.recursion_residual,
                "sup_gamma": e.sup_gamma,
                "symbol_min": e.symbol_min,
                "symbol_max": e.symbol_max,
            })
        })
        .collect();
    let report = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "params_hash": params_hash(&dec.params, dec.strategy),
        "L": dec.params.l,
        "eps": dec.params.eps,
        "strategy": dec.strategy,
        "n_max": dec.n_max,
        "extent": dec.extent(),
        "window": dec.window,
        "tol": dec.tol,
        "reconstruction_residual": dec.reconstruction_residual,
        "worst_offset": dec.worst_offset,
        "bare_residual": dec.bare_residual,
        "tail_bound": dec.tail_bound,
        "residuals": residuals,
        "cache_files": cache.files.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
    });
    let path = cfg.output_dir.join("decompose.json");
    write_json(&path, &report)?;
    Ok(DecomposeOutcome {
        report: path,
        cache,
        reconstruction_residual: dec.reconstruction_residual,
    })
}

/// Exact coefficients for n ≤ n_exact from a decomposition that stores the
/// unit ball of scale n_exact; b_n is zeroed when `rho_off` is set.
fn coefficients(cfg: &RunConfig) -> Result<FlowCoefficients, CliError> {
    let extent = support_radius(cfg.l, cfg.n_exact).max(cfg.window);
    let opts = DecomposeOptions {
        extent,
        window: cfg.window,
        pd_max_scale: 2,
        ..Default::default()
    };
    let (dec, _) = load_or_decompose(cfg, cfg.n_exact, &opts)?;
    let mut c = flow_coefficients(&dec, 0..=cfg.n_exact)?;
    if cfg.rho_off {
        c.b.iter_mut().for_each(|b| *b = 0.0);
        c.b_star = 0.0;
    }
    Ok(c)
}

fn build_flow(cfg: &RunConfig) -> Result<Flow, CliError> {
    Ok(Flow::new(cfg.parameters()?, coefficients(cfg)?)?)
}

fn mass_unit(flow: &Flow) -> f64 {
    flow.g_bar.powf(2.0 - flow.params.delta_exp)
}

/// Forward trajectory from the configured start; writes `flow.csv` with
/// horizon + 1 rows.
pub fn cmd_flow(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let flow = build_flow(cfg)?;
    let start = FlowState::new(
        cfg.n0,
        cfg.g_tilde0 * flow.params.nu * flow.g_bar,
        cfg.mu0 * mass_unit(&flow),
    );
    let states = flow.trajectory(start, cfg.horizon);
    create_output_dir(cfg)?;
    let path = cfg.output_dir.join("flow.csv");
    let mut buf = comment_line(cfg).into_bytes();
    {
        let mut wr = csv::Writer::from_writer(&mut buf);
        wr.write_record([
            "n",
            "a_n",
            "b_n",
            "g_n",
            "mu_n",
            "in_domain",
            "margin_g",
            "margin_mu",
            "margin_r",
        ])?;
        for s in &states {
            let d = flow.check_domain(s);
            wr.write_record([
                s.n.to_string(),
                format!("{:.17e}", flow.coeffs.a_at(s.n)),
                format!("{:.17e}", flow.coeffs.b_at(s.n)),
                format!("{:.17e}", s.g_tilde + flow.g_bar),
                format!("{:.17e}", s.mu),
                d.in_domain.to_string(),
                format!("{:.17e}", d.margins.g),
                format!("{:.17e}", d.margins.mu),
                format!("{:.17e}", d.margins.r),
            ])?;
        }
        wr.flush()?;
    }
    fs::write(&path, buf)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    One(Method),
    All,
}

impl FromStr for MethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(MethodChoice::All),
            "backward" => Ok(MethodChoice::One(Method::BackwardSum)),
            other => other.parse().map(MethodChoice::One).map_err(|_| {
                format!("unknown method {s:?} (expected backward, contraction, bisection or all)")
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    #[serde(flatten)]
    pub record: CriticalRecord,
    pub iterations: usize,
    pub tail_bound: f64,
    pub first_exit: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct CriticalOutcome {
    pub report: PathBuf,
    pub results: Vec<MethodResult>,
    pub max_relative_difference: Option<f64>,
}

fn solve(flow: &Flow, cfg: &RunConfig, m: Method) -> Result<CriticalSolution, CliError> {
    let g0 = cfg.g_tilde0 * flow.params.nu * flow.g_bar;
    let w = mass_unit(flow);
    let sol = match m {
        Method::BackwardSum => solve_backward_sum(flow, g0, cfg.n0, cfg.horizon, cfg.tol_critical)?,
        Method::Contraction => solve_contraction(flow, g0, cfg.n0, cfg.horizon, cfg.tol_critical)?,
        Method::Bisection => shoot_bisection(
            flow,
            g0,
            cfg.n0,
            cfg.horizon,
            (cfg.bracket_lo * w, cfg.bracket_hi * w),
        )?,
    };
    Ok(sol)
}

/// Largest |μ_i − μ_j| / max(|μ_i|, |μ_j|, ε_mach ḡ^{2−δ}) over pairs.
pub fn max_pairwise_relative_difference(mus: &[f64], unit: f64) -> f64 {
    let floor = f64::EPSILON * unit;
    let mut worst: f64 = 0.0;
    for (i, a) in mus.iter().enumerate() {
        for b in &mus[i + 1..] {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(floor));
        }
    }
    worst
}

/// Solves for the critical mass with one or all methods; writes
/// `critical.json` and one trajectory CSV per method.
pub fn cmd_critical(cfg: &RunConfig, choice: MethodChoice) -> Result<CriticalOutcome, CliError> {
    let flow = build_flow(cfg)?;
    let methods = match choice {
        MethodChoice::One(m) => vec![m],
        MethodChoice::All => vec![Method::BackwardSum, Method::Contraction, Method::Bisection],
    };
    create_output_dir(cfg)?;
    let mut results = Vec::new();
    for m in methods {
        let sol = solve(&flow, cfg, m)?;
        let csv_name = format!("critical-{}.csv", m.name());
        let mut buf = comment_line(cfg).into_bytes();
        write_trajectory_csv(&flow, &sol.trajectory.states, &mut buf)?;
        fs::write(cfg.output_dir.join(&csv_name), buf)?;
        results.push(MethodResult {
            record: CriticalRecord::new(&flow, &sol, Some(csv_name)),
            iterations: sol.iterations,
            tail_bound: sol.tail_bound,
            first_exit: sol.trajectory.first_exit(&flow),
        });
    }
    let mus: Vec<f64> = results.iter().map(|r| r.record.mu_critical).collect();
    let max_rel =
        (results.len() > 1).then(|| max_pairwise_relative_difference(&mus, mass_unit(&flow)));
    let report = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "g_bar": flow.g_bar,
        "a_star": flow.coeffs.a_star,
        "b_star": flow.coeffs.b_star,
        "n0": cfg.n0,
        "g_tilde_n0": cfg.g_tilde0 * flow.params.nu * flow.g_bar,
        "rho_off": cfg.rho_off,
        "results": results,
        "max_pairwise_relative_difference": max_rel,
        "tol_agreement": cfg.tol_agreement,
    });
    let path = cfg.output_dir.join("critical.json");
    write_json(&path, &report)?;
    if let Some(d) = max_rel {
        if d > cfg.tol_agreement {
            return Err(CliError::Tolerance(format!(
                "critical masses {mus:?} differ by {d:.3e} > {:.3e}",
                cfg.tol_agreement
            )));
        }
    }
    Ok(CriticalOutcome {
        report: path,
        results,
        max_relative_difference: max_rel,
    })
}

/// Runs an identity suite and writes `verify-<suite>.json`; fails with a
/// tolerance exit when any check fails.
pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> Result<VerifyReport, CliError> {
    let report = run_suite(suite);
    create_output_dir(cfg)?;
    let value = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "suite": suite.name(),
        "passed": report.passed(),
        "checks": report.checks,
    });
    write_json(
        &cfg.output_dir.join(format!("verify-{}.json", suite.name())),
        &value,
    )?;
    let mut out = std::io::stdout().lock();
    for c in &report.checks {
        writeln!(
            out,
            "{} {}/{}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.detail
        )?;
    }
    if !report.passed() {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}/{}", c.suite, c.name))
            .collect();
        return Err(CliError::Verify(failed.join(", ")));
    }
    Ok(report)
}
