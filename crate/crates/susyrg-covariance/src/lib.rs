//! Fractional lattice Green's function C = (−Δ)^{−α/2} on Z³ and its
//! finite-range multiscale decomposition.

mod bessel;
pub mod cache;
mod continuum;
mod decompose;
mod error;
pub mod gauss;
mod spectral;
mod subordination;
mod table;

pub use bessel::{hankel_coefficients, scaled_bessel_i};
pub use continuum::{continuum_kernel, continuum_limit_estimate, ContinuumEstimate};
pub use decompose::{
    c_n_table, decompose, decompose_with, derivative_sups, inverse_rescale, lpow,
    rescale_covariance, support_radius, window_scale, DecomposeOptions, DecompositionSet,
    PieceEvaluator, PointPieces, ResidualEntry,
};
pub use error::CovError;
pub use spectral::{
    aliasing_estimate, cube_singularity_average, fft3, spectral_greens, symbol_range,
};
pub use subordination::{Node, QuadratureSpec, Subordination, TimeBound, WindowSums};
pub use table::{
    canonical, octant_keys, octant_len, octant_multiplicity, params_hash, KernelTable, Strategy,
    TableMeta,
};

use susyrg_core::{GridSpec, Parameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreensMethod {
    /// Heat-kernel subordination quadrature (default).
    Subordination,
    /// Dense momentum-grid summation.
    Spectral,
}

/// C(x) for |x|∞ ≤ M/4 where M is the grid half-extent.
pub fn greens_function(
    params: &Parameters,
    grid: &GridSpec,
    method: GreensMethod,
) -> Result<KernelTable, CovError> {
    params.validate()?;
    let extent = (grid.half_extent / 4) as u32;
    if extent == 0 {
        return Err(CovError::GridTooSmall {
            extent: 1,
            half_extent: grid.half_extent,
            aliasing: aliasing_estimate(params.alpha(), grid.half_extent.max(1)),
        });
    }
    let meta = TableMeta::new(params, Strategy::SpectralWindow);
    match method {
        GreensMethod::Spectral => {
            spectral_greens(params.alpha(), grid.half_extent, extent, meta, grid.scale)
        }
        GreensMethod::Subordination => {
            let q = Subordination::new(
                params.alpha(),
                extent as usize,
                &[],
                QuadratureSpec::default(),
            )?;
            KernelTable::from_fn(grid.scale, extent, None, meta, |k| {
                q.greens(k.map(|v| v as i64))
            })
        }
    }
}
