use serde::Serialize;
use susyrg_core::Parameters;
use susyrg_covariance::{
    decompose_with, octant_len, octant_multiplicity, support_radius, DecomposeOptions,
    DecompositionSet, KernelTable, Strategy,
};

use crate::vkernels::{v_kernels, VKernels};
use crate::FlowError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowCoefficients {
    /// a_n for n = first..=last exact scale.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub first: u32,
    pub a_star: f64,
    pub b_star: f64,
    /// −slope of ln|a_{n+1} − a_n| against n.
    pub decay_fit: f64,
}

impl FlowCoefficients {
    pub fn last_exact(&self) -> u32 {
        self.first + self.a.len() as u32 - 1
    }

    /// a_n, falling back to a_star beyond the exactly computed range.
    pub fn a_at(&self, n: u32) -> f64 {
        n.checked_sub(self.first)
            .and_then(|i| self.a.get(i as usize))
            .copied()
            .unwrap_or(self.a_star)
    }

    pub fn b_at(&self, n: u32) -> f64 {
        n.checked_sub(self.first)
            .and_then(|i| self.b.get(i as usize))
            .copied()
            .unwrap_or(self.b_star)
    }

    /// Coefficients with every scale replaced by the limits.
    pub fn limits_only(a_star: f64, b_star: f64) -> Self {
        FlowCoefficients {
            a: Vec::new(),
            b: Vec::new(),
            first: 0,
            a_star,
            b_star,
            decay_fit: 0.0,
        }
    }
}

/// δ³ Σ_X over the scale-(n+1) lattice, with the octant multiplicities.
pub fn lattice_integral(table: &KernelTable) -> f64 {
    let sum: f64 = table
        .keys()
        .into_iter()
        .map(|k| octant_multiplicity(k) as f64 * table.at(k))
        .sum();
    table.scale.integrate(sum)
}

/// a_n = 4∫v^{(2)}_{n+1}, b_n = 2∫v^{(3)}_{n+1}.
pub fn coefficients_from(v: &VKernels) -> (f64, f64) {
    (
        4.0 * lattice_integral(v.get(2)),
        2.0 * lattice_integral(v.get(3)),
    )
}

/// Largest n whose unit-ball octant fits the window budget (4 for L = 3).
pub fn default_n_exact(l: u32) -> u32 {
    let mut n = 0;
    while octant_len(support_radius(l, n + 1)) <= 400_000 {
        n += 1;
    }
    n
}

/// Decomposition stored up to the unit-ball radius of scale n_exact.
pub fn coefficient_decomposition(
    params: &Parameters,
    strategy: Strategy,
    n_exact: u32,
) -> Result<DecompositionSet, FlowError> {
    let extent = support_radius(params.l, n_exact).max(10);
    let opts = DecomposeOptions {
        extent,
        window: 10,
        pd_max_scale: 2,
        ..Default::default()
    };
    Ok(decompose_with(params, n_exact, strategy, 1e-6, &opts)?)
}

/// Aitken Δ² limit of the last three terms; the last term when fewer exist
/// or the differences are not contracting.
pub fn aitken(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 3 {
        return *x.last().expect("nonempty sequence");
    }
    let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
    let (d1, d2) = (x1 - x0, x2 - x1);
    if d1 == d2 || (d2 / d1).abs() >= 1.0 {
        return x2;
    }
    x2 - d2 * d2 / (d2 - d1)
}

pub fn flow_coefficients(
    dec: &DecompositionSet,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<FlowCoefficients, FlowError> {
    let first = *n_range.start();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for n in n_range {
        let (an, bn) = coefficients_from(&v_kernels(dec, n)?);
        if !(an > 0.0) || !(bn > 0.0) {
            return Err(FlowError::NonPositive { n, a: an, b: bn });
        }
        a.push(an);
        b.push(bn);
    }
    if a.is_empty() {
        return Err(FlowError::Window("empty scale range".into()));
    }
    let a_star = aitken(&a);
    let b_star = aitken(&b);
    let diffs: Vec<(f64, f64)> = a
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            (
                (first + i as u32) as f64,
                (w[1] - w[0]).abs().max(1e-300).ln(),
            )
        })
        .collect();
    let decay_fit = if diffs.len() >= 2 {
        -slope(&diffs)
    } else {
        0.0
    };
    Ok(FlowCoefficients {
        a,
        b,
        first,
        a_star,
        b_star,
        decay_fit,
    })
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
