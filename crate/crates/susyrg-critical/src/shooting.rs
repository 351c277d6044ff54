use serde::Serialize;
use susyrg_rgflow::{Flow, FlowState};

use crate::sequence::{solve_contraction, CriticalSolution, Method, TrajectorySequence};
use crate::CriticalError;

fn forward(flow: &Flow, g0: f64, mu0: f64, n0: u32, steps: usize) -> Vec<FlowState> {
    let mut start = FlowState::new(n0, g0, mu0);
    start.w_norm = flow.w_norms.get(n0 as usize).copied().unwrap_or(0.0);
    flow.trajectory(start, steps)
}

/// Sign of μ at the first domain exit, or at the end of the window if none.
fn fate(flow: &Flow, g0: f64, mu0: f64, n0: u32, horizon: usize) -> Result<f64, CriticalError> {
    let states = forward(flow, g0, mu0, n0, horizon);
    let limit = flow.params.nu * flow.g_bar;
    if let Some(s) = states.iter().find(|s| !(s.g_tilde.abs() < limit)) {
        return Err(CriticalError::OutOfDomain { n: s.n });
    }
    let at = flow.first_exit(&states).unwrap_or(states.len() - 1);
    Ok(states[at].mu.signum())
}

/// Bisection on μ_{n0} by the sign of μ where the forward trajectory leaves
/// the domain. Stops when the bracket is a few ulps wide.
pub fn shoot_bisection(
    flow: &Flow,
    g_tilde_n0: f64,
    n0: u32,
    horizon: usize,
    bracket: (f64, f64),
) -> Result<CriticalSolution, CriticalError> {
    let (mut lo, mut hi) = bracket;
    let s_lo = fate(flow, g_tilde_n0, lo, n0, horizon)?;
    let s_hi = fate(flow, g_tilde_n0, hi, n0, horizon)?;
    if s_lo == s_hi {
        return Err(CriticalError::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        iterations += 1;
        if fate(flow, g_tilde_n0, mid, n0, horizon)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let traj = TrajectorySequence::new(flow, n0, forward(flow, g_tilde_n0, mu, n0, horizon));
    let residual = (hi - lo).abs() / flow.g_bar.powf(2.0 - flow.params.delta_exp);
    Ok(CriticalSolution {
        mu_critical: mu,
        trajectory: traj,
        method: Method::Bisection,
        residual,
        lipschitz: None,
        iterations,
        tail_bound: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedExit {
    /// Steps after n0 until the perturbed trajectory leaves the domain.
    pub exit_steps: Option<usize>,
    /// Geometric mean of the per-step growth of |μ_n − μ_n^c| before the exit.
    pub growth: f64,
}

/// Runs the flow from μ_c + delta against the solved trajectory.
pub fn exit_after_perturbation(flow: &Flow, sol: &CriticalSolution, delta: f64) -> PerturbedExit {
    let base = &sol.trajectory.states;
    let start = base[0];
    let states = forward(
        flow,
        start.g_tilde,
        sol.mu_critical + delta,
        start.n,
        base.len() - 1,
    );
    let exit_steps = flow.first_exit(&states);
    let end = exit_steps.unwrap_or(states.len() - 1).max(1);
    let dev = |i: usize| (states[i].mu - base[i].mu).abs();
    let growth = (dev(end) / dev(0)).powf(1.0 / end as f64);
    PerturbedExit { exit_steps, growth }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitLatticeShot {
    pub mu0: f64,
    /// dμ_{n0}/dμ_0 of the composed map, by central differences.
    pub derivative: f64,
    /// L^{(3+ε)/2 n0}.
    pub linear_derivative: f64,
    pub iterations: usize,
    /// |μ_{n0}(μ_0) − target|.
    pub residual: f64,
}

/// Solves for μ_0 such that n0 steps from (g̃_0, μ_0) at scale 0 land on
/// `mu_target`, by safeguarded Newton with a finite-difference derivative.
pub fn shoot_unit_lattice(
    flow: &Flow,
    g0_tilde: f64,
    mu_target: f64,
    n0: u32,
) -> Result<UnitLatticeShot, CriticalError> {
    let compose = |mu0: f64| {
        forward(flow, g0_tilde, mu0, 0, n0 as usize)
            .last()
            .expect("nonempty")
            .mu
    };
    let linear = flow.params.mass_multiplier().powi(n0 as i32);
    let unit = flow.g_bar.powf(2.0 - flow.params.delta_exp);
    let h = 1e-3 * unit / linear;
    let derivative = (compose(h) - compose(-h)) / (2.0 * h);
    if !derivative.is_finite() || derivative.abs() < 1e-8 * linear {
        return Err(CriticalError::ZeroDerivative(derivative));
    }
    let scale = mu_target.abs().max(unit);
    let mut x = mu_target / linear;
    let mut f = compose(x) - mu_target;
    let mut iterations = 0;
    while f.abs() > 1e-13 * scale {
        if iterations >= 50 {
            return Err(CriticalError::NewtonStall { residual: f.abs() });
        }
        iterations += 1;
        let mut step = f / derivative;
        let mut accepted = false;
        for _ in 0..30 {
            let f_new = compose(x - step) - mu_target;
            if f_new.abs() < f.abs() {
                x -= step;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(CriticalError::NewtonStall { residual: f.abs() });
        }
    }
    Ok(UnitLatticeShot {
        mu0: x,
        derivative,
        linear_derivative: linear,
        iterations,
        residual: f.abs(),
    })
}

/// Flows g̃_0 to scale n0, solves the critical mass there on a window of
/// `horizon` scales, and shoots μ_0 onto it.
pub fn unit_lattice_critical(
    flow: &Flow,
    g0_tilde: f64,
    n0: u32,
    horizon: usize,
    tol: f64,
) -> Result<(UnitLatticeShot, CriticalSolution), CriticalError> {
    let g_n0 = forward(flow, g0_tilde, 0.0, 0, n0 as usize)
        .last()
        .expect("nonempty")
        .g_tilde;
    let sol = solve_contraction(flow, g_n0, n0, horizon, tol)?;
    let shot = shoot_unit_lattice(flow, g0_tilde, sol.mu_critical, n0)?;
    Ok((shot, sol))
}
