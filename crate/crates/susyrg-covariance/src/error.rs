use susyrg_core::{CoreError, Site};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CovError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("offset {offset:?} beyond precomputed range {kmax}")]
    OutOfRange { offset: Site, kmax: usize },
    #[error("grid half-extent {half_extent} too small for |x| <= {extent}; estimated aliasing error {aliasing:.3e}")]
    GridTooSmall {
        extent: u32,
        half_extent: usize,
        aliasing: f64,
    },
    #[error("residual {value:.3e} exceeds tolerance {tol:.3e} at n = {n}, offset {offset:?}")]
    Residual {
        n: u32,
        offset: Site,
        value: f64,
        tol: f64,
    },
    #[error("offset {0:?} not representable at the coarser scale")]
    NotRepresentable(Site),
    #[error("table at scale {0} has no coarser scale")]
    NoCoarserScale(u32),
    #[error("decomposition depth {have} insufficient for scale {want}")]
    InsufficientDepth { have: u32, want: u32 },
    #[error("cache format: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
