use serde::Serialize;
use susyrg_rgflow::{Flow, FlowState};

use crate::CriticalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BackwardSum,
    Contraction,
    Bisection,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BackwardSum => "backward-sum",
            Method::Contraction => "contraction",
            Method::Bisection => "bisection",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "backward-sum" => Ok(Method::BackwardSum),
            "contraction" => Ok(Method::Contraction),
            "bisection" => Ok(Method::Bisection),
            _ => Err(format!(
                "unknown method {s:?} (expected backward-sum, contraction or bisection)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySequence {
    pub n0: u32,
    pub states: Vec<FlowState>,
    /// sup_n ‖ψ_n‖_n.
    pub box_norm: f64,
}

impl TrajectorySequence {
    pub fn new(flow: &Flow, n0: u32, states: Vec<FlowState>) -> Self {
        let box_norm = states.iter().map(|s| flow.norm(s)).fold(0.0, f64::max);
        TrajectorySequence {
            n0,
            states,
            box_norm,
        }
    }

    /// Scale of the first state outside the domain.
    pub fn first_exit(&self, flow: &Flow) -> Option<u32> {
        flow.first_exit(&self.states).map(|i| self.states[i].n)
    }

    /// Smallest n1 with |g_n − ḡ| < width·ḡ for every stored n ≥ n1.
    pub fn band_entry(&self, flow: &Flow, width: f64) -> Option<u32> {
        let inside = |s: &FlowState| s.g_tilde.abs() < width * flow.g_bar;
        let last_out = self.states.iter().rposition(|s| !inside(s));
        match last_out {
            None => self.states.first().map(|s| s.n),
            Some(i) => self.states.get(i + 1).map(|s| s.n),
        }
    }

    /// max over n < N of the box-norm distance between f(ψ_n) and ψ_{n+1}.
    pub fn step_residual(&self, flow: &Flow) -> f64 {
        self.states
            .windows(2)
            .map(|w| state_distance(flow, &flow.step(&w[0]), &w[1]))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSolution {
    pub mu_critical: f64,
    pub trajectory: TrajectorySequence,
    pub method: Method,
    /// Box-norm distance between the trajectory and its image under the fixed-point map.
    pub residual: f64,
    /// Largest measured iterate-contraction ratio, for the contraction method.
    pub lipschitz: Option<f64>,
    pub iterations: usize,
    /// Analytic bound on the μ_{n0} truncation error of the finite window.
    pub tail_bound: f64,
}

/// Serializable summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalRecord {
    #[serde(rename = "L")]
    pub l: u32,
    pub eps: f64,
    pub nu: f64,
    pub method: String,
    pub mu_critical: f64,
    pub residual: f64,
    pub horizon: usize,
    pub trajectory_csv_path: Option<String>,
}

impl CriticalRecord {
    pub fn new(flow: &Flow, sol: &CriticalSolution, csv_path: Option<String>) -> Self {
        CriticalRecord {
            l: flow.params.l,
            eps: flow.params.eps,
            nu: flow.params.nu,
            method: sol.method.name().to_string(),
            mu_critical: sol.mu_critical,
            residual: sol.residual,
            horizon: sol.trajectory.states.len().saturating_sub(1),
            trajectory_csv_path: csv_path,
        }
    }
}

fn state_distance(flow: &Flow, a: &FlowState, b: &FlowState) -> f64 {
    let p = &flow.params;
    ((a.g_tilde - b.g_tilde).abs() / (p.nu * flow.g_bar))
        .max((a.mu - b.mu).abs() / flow.g_bar.powf(2.0 - p.delta_exp))
}

/// Box-norm distance sup_n ‖ψ_n − ψ'_n‖_n between two sequences on the same window.
pub fn sequence_distance(flow: &Flow, a: &[FlowState], b: &[FlowState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| state_distance(flow, x, y))
        .fold(0.0, f64::max)
}

/// One application of the fixed-point map on the window n0..=N:
/// g̃_{n+1} = α^{n+1−n0} g̃_{n0} + Σ_{j=n0}^{n} α^{n−j} ξ̃_j(ψ_j) and
/// μ_n = −Σ_{j=n}^{N−1} L^{−(3+ε)/2 (j−n+1)} ρ̃_j(ψ_j), μ_N = 0.
pub fn apply_f(flow: &Flow, g0: f64, s: &[FlowState]) -> Vec<FlowState> {
    let alpha = flow.params.alpha_eps();
    let lambda = 1.0 / flow.params.mass_multiplier();
    let (xi, rho): (Vec<f64>, Vec<f64>) = s
        .iter()
        .map(|st| {
            let (x, r) = flow.remainder(st);
            (
                flow.xi_tilde(st.n, st.g_tilde) + x,
                flow.rho_tilde(st.n, st.g_tilde) + r,
            )
        })
        .unzip();
    let mut out: Vec<FlowState> = s.to_vec();
    let mut g = g0;
    for i in 0..s.len() {
        out[i].g_tilde = g;
        g = alpha * g + xi[i];
    }
    let last = s.len() - 1;
    out[last].mu = 0.0;
    for i in (0..last).rev() {
        out[i].mu = lambda * (out[i + 1].mu - rho[i]);
    }
    out
}

fn window(flow: &Flow, n0: u32, len: usize) -> Vec<FlowState> {
    (0..len)
        .map(|i| {
            let n = n0 + i as u32;
            let mut s = FlowState::new(n, 0.0, 0.0);
            s.w_norm = flow.w_norms.get(n as usize).copied().unwrap_or(0.0);
            s
        })
        .collect()
}

/// g̃_n for n = n0..=n0+horizon from the autonomous perturbative recursion,
/// checked against the summed form. The remainder hook is not consulted.
pub fn solve_g_forward(
    flow: &Flow,
    g_tilde_n0: f64,
    n0: u32,
    horizon: usize,
) -> Result<Vec<f64>, CriticalError> {
    let alpha = flow.params.alpha_eps();
    let limit = flow.params.nu * flow.g_bar;
    let mut g = vec![g_tilde_n0];
    let mut xi = Vec::with_capacity(horizon);
    for i in 0..horizon {
        let n = n0 + i as u32;
        if !(g[i].abs() < limit) {
            return Err(CriticalError::OutOfDomain { n });
        }
        xi.push(flow.xi_tilde(n, g[i]));
        g.push(alpha * g[i] + xi[i]);
    }
    if !(g[horizon].abs() < limit) {
        return Err(CriticalError::OutOfDomain {
            n: n0 + horizon as u32,
        });
    }
    for k in 1..=horizon {
        let summed = alpha.powi(k as i32) * g_tilde_n0
            + (0..k)
                .map(|j| alpha.powi((k - 1 - j) as i32) * xi[j])
                .sum::<f64>();
        let difference = (summed - g[k]).abs();
        if difference > 1e-12 * limit {
            return Err(CriticalError::Inconsistent {
                n: n0 + k as u32,
                difference,
            });
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackwardSum {
    pub mu: f64,
    /// Bound on the terms beyond the window.
    pub tail_bound: f64,
}

/// μ_m = −Σ_{j=m}^{N−1} L^{−(3+ε)/2 (j−m+1)} ρ̃_j for a g-trajectory g_traj[j − n0],
/// j = n0..=N. Fails if the analytic bound on the omitted terms j ≥ N exceeds `tol`.
pub fn mu_backward_sum(
    flow: &Flow,
    g_traj: &[f64],
    n0: u32,
    m: u32,
    tol: f64,
) -> Result<BackwardSum, CriticalError> {
    let lambda = 1.0 / flow.params.mass_multiplier();
    let big_n = n0 + g_traj.len() as u32 - 1;
    assert!(
        m >= n0 && m <= big_n,
        "scale {m} outside the window {n0}..={big_n}"
    );
    let rho: Vec<f64> = (m..big_n)
        .map(|j| flow.rho_tilde(j, g_traj[(j - n0) as usize]))
        .collect();
    let mu = -rho
        .iter()
        .enumerate()
        .map(|(k, r)| lambda.powi(k as i32 + 1) * r)
        .sum::<f64>();
    let g_max = flow.g_bar * (1.0 + flow.params.nu);
    let sup = rho.iter().fold(
        flow.params.lf().powf(2.0 * flow.params.eps) * flow.coeffs.b_star * g_max * g_max,
        |a, r| a.max(r.abs()),
    );
    let tail_bound = sup * lambda.powi((big_n - m) as i32 + 1) / (1.0 - lambda);
    if tail_bound > tol {
        return Err(CriticalError::InsufficientHorizon {
            tail: tail_bound,
            tol,
        });
    }
    Ok(BackwardSum { mu, tail_bound })
}

fn check_in_domain(flow: &Flow, traj: &TrajectorySequence) -> Result<(), CriticalError> {
    match traj.first_exit(flow) {
        Some(n) => Err(CriticalError::OutOfDomain { n }),
        None => Ok(()),
    }
}

/// Forward g-recursion followed by the backward μ sums at every scale of the window.
pub fn solve_backward_sum(
    flow: &Flow,
    g_tilde_n0: f64,
    n0: u32,
    horizon: usize,
    tol: f64,
) -> Result<CriticalSolution, CriticalError> {
    let g = solve_g_forward(flow, g_tilde_n0, n0, horizon)?;
    let mut states = window(flow, n0, horizon + 1);
    let mut tail_bound = 0.0;
    for (i, s) in states.iter_mut().enumerate() {
        s.g_tilde = g[i];
        let b = mu_backward_sum(
            flow,
            &g,
            n0,
            s.n,
            if i == 0 { tol / 10.0 } else { f64::INFINITY },
        )?;
        s.mu = b.mu;
        if i == 0 {
            tail_bound = b.tail_bound;
        }
    }
    let traj = TrajectorySequence::new(flow, n0, states);
    check_in_domain(flow, &traj)?;
    let residual = sequence_distance(flow, &traj.states, &apply_f(flow, g_tilde_n0, &traj.states));
    Ok(CriticalSolution {
        mu_critical: traj.states[0].mu,
        trajectory: traj,
        method: Method::BackwardSum,
        residual,
        lipschitz: None,
        iterations: 1,
        tail_bound,
    })
}

/// Iterates s ← F(s) from the zero sequence until successive iterates are
/// within `tol` in the box norm. Three consecutive ratios ≥ 1 abort.
pub fn solve_contraction(
    flow: &Flow,
    g_tilde_n0: f64,
    n0: u32,
    horizon: usize,
    tol: f64,
) -> Result<CriticalSolution, CriticalError> {
    let max_iter = 4 * horizon + 100;
    let mut s = window(flow, n0, horizon + 1);
    s[0].g_tilde = g_tilde_n0;
    let mut prev: Option<f64> = None;
    let mut worst: f64 = 0.0;
    let mut growing = 0;
    let mut iterations = 0;
    loop {
        let t = apply_f(flow, g_tilde_n0, &s);
        let d = sequence_distance(flow, &s, &t);
        iterations += 1;
        s = t;
        if let Some(p) = prev.filter(|&p| p > 1e-12) {
            let ratio = d / p;
            worst = worst.max(ratio);
            growing = if ratio >= 1.0 { growing + 1 } else { 0 };
            if growing >= 3 {
                return Err(CriticalError::NonContraction { ratio });
            }
        }
        if d < tol {
            break;
        }
        if iterations >= max_iter || !d.is_finite() {
            return Err(CriticalError::NotConverged {
                iterations,
                residual: d,
            });
        }
        prev = Some(d);
    }
    let residual = sequence_distance(flow, &s, &apply_f(flow, g_tilde_n0, &s));
    let lambda = 1.0 / flow.params.mass_multiplier();
    let g_max = flow.g_bar * (1.0 + flow.params.nu);
    let sup = s.iter().fold(
        flow.params.lf().powf(2.0 * flow.params.eps) * flow.coeffs.b_star * g_max * g_max,
        |a, st| a.max(flow.rho_tilde(st.n, st.g_tilde).abs()),
    );
    let tail_bound = sup * lambda.powi(horizon as i32 + 1) / (1.0 - lambda);
    let traj = TrajectorySequence::new(flow, n0, s);
    check_in_domain(flow, &traj)?;
    Ok(CriticalSolution {
        mu_critical: traj.states[0].mu,
        trajectory: traj,
        method: Method::Contraction,
        residual,
        lipschitz: Some(worst),
        iterations,
        tail_bound,
    })
}
