//! Discrete flow of (g, μ) around the nontrivial fixed point ḡ.

mod flow;
mod reference;

pub use flow::{write_trajectory_csv, DomainReport, Flow, FlowState, Margins, RemainderHook};
pub use reference::{g_bar, iterate_reference, reference_step, ReferenceRun};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RgError {
    #[error("a_star must be positive, got {0}")]
    NonPositiveAStar(f64),
    #[error("ε must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
