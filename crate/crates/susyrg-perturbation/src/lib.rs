//! Second-order perturbation theory for the supersymmetric RG step: the kernels
//! Q and Q̃, the fluctuation integral of ½p_g², and the local part of F_Q that
//! feeds the coupling flow.

pub mod evaluate;
pub mod extraction;
pub mod fluctuation;
pub mod kernels;
pub mod localization;

pub use evaluate::{eval_q, evaluate_bosonic, evaluate_complex, BlockSet, QKernelSpec, QValues};
pub use extraction::{extract_fq, f_q, f_q_localized, second_order_couplings, Extraction};
pub use fluctuation::{mixed_pair, Matching, Toy};
pub use kernels::{hat_x, q11, q22, q33, q_tilde_total, q_total, qt11, qt22, v_matrices, Matrix};
pub use localization::{localization_check, localization_identities, LocalizationReport};

use susyrg_core::Site;
use susyrg_superalgebra::AlgebraError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PerturbError {
    #[error(
        "a toy holds at most {} points, got {0}",
        susyrg_superalgebra::MAX_SITES
    )]
    TooManyPoints(usize),
    #[error("small sets have one or two blocks, got {0}")]
    TooManyBlocks(usize),
    #[error("blocks must partition the points and match the covariance dimensions")]
    BadBlocks,
    #[error("field has {got} values for {expected} points")]
    FieldLength { expected: usize, got: usize },
    #[error("kernel table does not reach displacement {0:?}")]
    OutsideTable(Site),
    #[error("{what}: extracted {got:e}, expected {want:e}")]
    Mismatch { what: String, got: f64, want: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
