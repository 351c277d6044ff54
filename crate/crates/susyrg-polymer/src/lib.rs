//! Unit-block polymers, small sets, L-closures, and the regulators A_p and G_κ.

pub mod enumerate;
pub mod polymer;
pub mod regulator;
pub mod scan;

pub use enumerate::{for_each_polymer, neighbor_offsets, polymer_counts};
pub use polymer::{log_regulator_a, touching, Polymer, SMALL_SET_SIZE};
pub use regulator::{regulator_g, regulator_norm_sq, stability_spot_check, StabilityReport};
pub use scan::{
    closure_scan, large_family, max_closure_size, ratio, LargeFamily, ScanReport, SizeRow,
    MAX_SCAN_SIZE,
};

use susyrg_core::{CoreError, Site};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolymerError {
    #[error("polymer is not connected")]
    Disconnected,
    #[error("L = {0} is not a power of 3")]
    NotTriadic(u32),
    #[error("enumeration cap {cap} exceeds {max}")]
    CapTooLarge { cap: usize, max: usize },
    #[error("field and polymer live on different scales")]
    ScaleMismatch,
    #[error("covariance table does not reach displacement {0:?}")]
    OutsideTable(Site),
    #[error("restricted covariance is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Core(#[from] CoreError),
}
