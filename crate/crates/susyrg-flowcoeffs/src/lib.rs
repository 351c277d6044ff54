//! Second-order flow coefficients and the kernel flow.
//!
//! Scale-n quantities are stored in integer units of the finer lattice on
//! which they live: v_{n+1} and a_n, b_n use δ = L^{−(n+1)}.

mod coefficients;
mod vkernels;
mod wflow;

pub use coefficients::{
    aitken, coefficient_decomposition, coefficients_from, default_n_exact, flow_coefficients,
    lattice_integral, FlowCoefficients,
};
pub use vkernels::{v_kernels, VKernels, FACTOR_TOL};
pub use wflow::{coarse_window_differences, w_flow, weighted_norm, write_csv, WKernels};

use susyrg_covariance::CovError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Covariance(#[from] CovError),
    #[error("difference-of-powers and factorized v^({p}) differ by {difference:.3e} at n = {n}, offset {offset:?}")]
    Mismatch {
        n: u32,
        p: u32,
        offset: [u32; 3],
        difference: f64,
    },
    #[error("nonpositive coefficient at n = {n}: a = {a:.6e}, b = {b:.6e}")]
    NonPositive { n: u32, a: f64, b: f64 },
    #[error("window: {0}")]
    Window(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
