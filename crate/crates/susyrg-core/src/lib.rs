//! Shared parameters, lattice index arithmetic and lattice derivatives.

mod derivative;
mod error;
mod field;
mod params;
mod scale;
mod sobolev;

pub use derivative::{
    lattice_derivative, taylor_path_expand, Direction, TaylorExpansion, TaylorTerm,
};
pub use error::CoreError;
pub use field::{Field3, GridMode, GridSpec};
pub use params::Parameters;
pub use scale::ScaleIndex;
pub use sobolev::{sobolev_norm_sq, SOBOLEV_DIRECTIONS};

/// Integer site coordinates at the finest active scale.
pub type Site = [i64; 3];

/// Symbol of the lattice Laplacian, `2 Σ (cos p_μ − 1)`.
pub fn laplacian_symbol(p: [f64; 3]) -> f64 {
    2.0 * p.iter().map(|q| q.cos() - 1.0).sum::<f64>()
}

/// Sup norm of an integer offset.
pub fn sup_norm(x: Site) -> i64 {
    x.iter().map(|v| v.abs()).max().unwrap_or(0)
}
