use serde::Serialize;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

use crate::decompose::{lpow, support_radius, window_scale, DecompositionSet, PieceEvaluator};
use crate::error::CovError;
use crate::gauss::composite;
use crate::table::{KernelTable, Strategy};

#[derive(Debug, Clone, Serialize)]
pub struct ContinuumEstimate {
    #[serde(skip)]
    pub gamma_star: KernelTable,
    /// sup_y |Γ_n(y) − Γ_{c,*}(y)| on the fixed lattice, n = l_fixed..=n_max.
    pub distances: Vec<f64>,
    /// sup_y |Γ_{n+1}(y) − Γ_n(y)|.
    pub successive: Vec<f64>,
    /// −slope of ln(distance) against n.
    pub rate_fit: f64,
    /// Whether the distances decrease monotonically.
    pub monotone: bool,
}

/// Continuum limit of Γ_n on the scale-l lattice, y ranging over |y|∞ < L/2.
pub fn continuum_limit_estimate(
    dec: &DecompositionSet,
    l_fixed: u32,
) -> Result<ContinuumEstimate, CovError> {
    let p = &dec.params;
    if dec.n_max < l_fixed + 4 {
        return Err(CovError::InsufficientDepth {
            have: dec.n_max,
            want: l_fixed + 4,
        });
    }
    let r = support_radius(p.l, l_fixed);
    let kmax = lpow(p.l, dec.n_max - l_fixed) as usize * r as usize;
    let eval = PieceEvaluator::new(p, dec.strategy, dec.n_max, kmax, dec_quadrature())?;
    let meta = dec.gammas[0].meta.clone();
    let scale = p.scale(l_fixed);
    let two_ds = 2.0 * p.d_s();
    let lf = p.lf();

    let keys = crate::table::octant_keys(r);
    let mut series: Vec<Vec<f64>> = Vec::new();
    for n in l_fixed..=dec.n_max {
        let f = lf.powf(two_ds * n as f64);
        let stride = lpow(p.l, n - l_fixed) as u32;
        let vals = keys
            .iter()
            .map(|k| Ok(f * eval.evaluate(k.map(|v| v * stride))?.pieces[n as usize]))
            .collect::<Result<Vec<_>, CovError>>()?;
        series.push(vals);
    }
    let inv = 1.0 / lpow(p.l, l_fixed) as f64;
    let star: Vec<f64> = keys
        .iter()
        .map(|k| continuum_kernel(dec.strategy, p.alpha(), p.l, k.map(|v| v as f64 * inv)))
        .collect();
    let gamma_star = KernelTable::from_values(scale, r, Some(r), star.clone(), meta)?;
    let sup_diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let distances: Vec<f64> = series.iter().map(|s| sup_diff(s, &star)).collect();
    let successive: Vec<f64> = series.windows(2).map(|w| sup_diff(&w[0], &w[1])).collect();
    let xs: Vec<f64> = (l_fixed..=dec.n_max).map(|n| n as f64).collect();
    let ys: Vec<f64> = distances.iter().map(|d| d.max(1e-300).ln()).collect();
    let rate_fit = -slope(&xs, &ys);
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(ContinuumEstimate {
        gamma_star,
        distances,
        successive,
        rate_fit,
        monotone,
    })
}

fn dec_quadrature() -> crate::subordination::QuadratureSpec {
    crate::subordination::QuadratureSpec::default()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Deep-scale limit of Γ_n at a continuum point y with |y|∞ < L/2.
pub fn continuum_kernel(strategy: Strategy, alpha: f64, l: u32, y: [f64; 3]) -> f64 {
    let a = alpha / 2.0;
    let s = window_scale(strategy);
    let lf = l as f64;
    let m = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if 2.0 * m >= lf {
        return 0.0;
    }
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let integrand: Box<dyn Fn(f64) -> f64> = match strategy {
        Strategy::SpectralWindow => Box::new(move |tau: f64| {
            (4.0 * std::f64::consts::PI * tau).powf(-1.5) * (-r2 / (4.0 * tau)).exp()
        }),
        Strategy::PositionAverage => {
            let c = lf / 4.0;
            Box::new(move |tau: f64| {
                y.iter()
                    .map(|&v| truncated_autoconvolution(v, tau, c))
                    .product()
            })
        }
    };
    let lo = match strategy {
        Strategy::SpectralWindow if 2.0 * m >= 1.0 => 1e-10 * s,
        _ => s,
    };
    let (u0, u1) = (lo.ln(), (s * lf * lf).ln());
    let panels = ((u1 - u0) / 0.25).ceil() as usize;
    composite(u0, u1, panels, 16)
        .into_iter()
        .map(|(u, w)| {
            let t = u.exp();
            w * t.powf(a) * integrand(t)
        })
        .sum::<f64>()
        / gamma(a)
}

/// ∫ g(b) g(y−b) db over |b| ≤ c, |y−b| ≤ c for the centered Gaussian of variance τ.
fn truncated_autoconvolution(y: f64, tau: f64, c: f64) -> f64 {
    let lo = (-c).max(y - c);
    let hi = c.min(y + c);
    if hi <= lo {
        return 0.0;
    }
    let sd = tau.sqrt();
    let pref = (-y * y / (4.0 * tau)).exp() / (2.0 * std::f64::consts::PI * tau);
    pref * 0.5
        * sd
        * std::f64::consts::PI.sqrt()
        * (erf((hi - y / 2.0) / sd) - erf((lo - y / 2.0) / sd))
}
