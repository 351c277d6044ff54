//! Critical mass of the coupling flow.
//!
//! The trajectory is solved on a finite window of scales n0..=N with μ_N = 0.
//! On that window the backward sum for μ is exact, so a solution satisfies
//! the flow map at every step n0 ≤ n < N.

mod lipschitz;
mod sequence;
mod shooting;

pub use lipschitz::{lipschitz_samples, LipschitzReport};
pub use sequence::{
    apply_f, mu_backward_sum, sequence_distance, solve_backward_sum, solve_contraction,
    solve_g_forward, BackwardSum, CriticalRecord, CriticalSolution, Method, TrajectorySequence,
};
pub use shooting::{
    exit_after_perturbation, shoot_bisection, shoot_unit_lattice, unit_lattice_critical,
    PerturbedExit, UnitLatticeShot,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error(transparent)]
    Rg(#[from] susyrg_rgflow::RgError),
    #[error("trajectory leaves the domain at scale {n}")]
    OutOfDomain { n: u32 },
    #[error("summed and iterated forms differ by {difference:.3e} at scale {n}")]
    Inconsistent { n: u32, difference: f64 },
    #[error("horizon too short: tail bound {tail:.3e} exceeds tolerance {tol:.3e}")]
    InsufficientHorizon { tail: f64, tol: f64 },
    #[error("fixed-point map is not contracting: measured ratio {ratio:.3}")]
    NonContraction { ratio: f64 },
    #[error(
        "contraction did not reach tolerance in {iterations} iterations (residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },
    #[error("no sign change of the final mass in the bracket [{lo:.6e}, {hi:.6e}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("Newton iteration stalled at residual {residual:.3e}")]
    NewtonStall { residual: f64 },
    #[error("derivative of the composed map is {0:.3e}")]
    ZeroDerivative(f64),
}
