//! The large-field regulator G_κ(X, φ) = exp(κ‖φ‖²_{X,1,5}).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use susyrg_core::{sobolev_norm_sq, Field3};
use susyrg_covariance::KernelTable;

use crate::polymer::Polymer;
use crate::PolymerError;

/// ‖φ‖²_{X,1,5} over the lattice points of X. The field must carry a collar of five sites.
pub fn regulator_norm_sq(phi: &Field3<Complex64>, x: &Polymer) -> Result<f64, PolymerError> {
    if phi.scale != x.scale {
        return Err(PolymerError::ScaleMismatch);
    }
    Ok(sobolev_norm_sq(phi, &x.sites())?)
}

pub fn regulator_g(phi: &Field3<Complex64>, x: &Polymer, kappa: f64) -> Result<f64, PolymerError> {
    Ok((kappa * regulator_norm_sq(phi, x)?).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub samples: usize,
    /// Sample mean of G_κ(X, ζ + φ).
    pub mean: f64,
    pub std_error: f64,
    /// 2^{|X|} G_{2κ}(X, φ).
    pub bound: f64,
}

/// Monte-Carlo estimate of ∫dμ_Γ(ζ) G_κ(X, ζ + φ), with ζ sampled on every site of
/// the field's grid from the dense Cholesky factor of Γ restricted to it.
pub fn stability_spot_check(
    gamma: &KernelTable,
    x: &Polymer,
    phi: &Field3<Complex64>,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<StabilityReport, PolymerError> {
    let sites: Vec<_> = phi.sites().collect();
    let n = sites.len();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for (i, a) in sites.iter().enumerate() {
        for (j, b) in sites.iter().enumerate() {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            cov[(i, j)] = gamma.get(d).ok_or(PolymerError::OutsideTable(d))?;
        }
    }
    let chol = cov.cholesky().ok_or(PolymerError::NotPositiveDefinite)?;
    let factor = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    let mut field = phi.clone();
    for _ in 0..samples {
        let re =
            factor.clone() * nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let im = factor.clone()
            * nalgebra::DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        for (i, s) in sites.iter().enumerate() {
            let z = Complex64::new(re[i], im[i]) * std::f64::consts::FRAC_1_SQRT_2;
            field.set(*s, phi.get(*s)? + z)?;
        }
        values.push(regulator_g(&field, x, kappa)?);
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
    let bound = 2f64.powi(x.size() as i32) * regulator_g(phi, x, 2.0 * kappa)?;
    Ok(StabilityReport {
        samples,
        mean,
        std_error: (var / samples as f64).sqrt(),
        bound,
    })
}
