//! Finite-range multiscale decomposition C = Σ_n L^{−2n d_s} Γ_n(·/L^n).
//!
//! Both strategies split the subordination integral at times T_j = s L^{2j}.
//! Spectral-window: piece n is the heat-kernel integral over [T_n, T_{n+1}],
//! hard-truncated at |x|∞ < L^{n+1}/2; the truncation defect of the shorter
//! window is folded into the next piece so that C_{≥n} = piece_n + C_{≥n+1}
//! holds identically. Position-average: each axis factor is the
//! autoconvolution of a truncated half-time kernel, which is exactly
//! finite-range and positive definite; the remainder absorbs the difference.

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::scaled_bessel_i;
use crate::error::CovError;
use crate::spectral::symbol_range;
use crate::subordination::{QuadratureSpec, Subordination, TimeBound, WindowSums};
use crate::table::{octant_keys, KernelTable, Strategy, TableMeta};
use susyrg_core::{Parameters, Site};

/// Time-window scale s = 1/(16 ln 10^{12}): at the upper end of each window the
/// heat kernel is below 10^{−12} beyond the truncation radius.
pub fn window_scale(strategy: Strategy) -> f64 {
    let s = 1.0 / (16.0 * 1e12f64.ln());
    match strategy {
        Strategy::SpectralWindow => s,
        Strategy::PositionAverage => s / 2.0,
    }
}

/// L^n as an integer.
pub fn lpow(l: u32, n: u32) -> u64 {
    (l as u64).pow(n)
}

/// Largest |x|∞ inside the range L^{n+1}/2 of Γ_n, in scale-n integer units.
pub fn support_radius(l: u32, n: u32) -> u32 {
    ((lpow(l, n + 1) - 1) / 2) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOptions {
    /// Stored |x|∞ range of every table.
    pub extent: u32,
    /// Reconstruction test window |x|∞ ≤ window on the unit lattice.
    pub window: u32,
    pub quadrature: QuadratureSpec,
    /// Positive-definiteness is checked for n up to this scale when the table is complete.
    pub pd_max_scale: u32,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            extent: 41,
            window: 10,
            quadrature: QuadratureSpec::default(),
            pd_max_scale: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub n: u32,
    /// sup |C_n − Γ_n − S_L C_{n+1}| over the stored range.
    pub recursion_residual: f64,
    pub tail_mass: f64,
    pub sup_gamma: f64,
    /// min/max of the discrete transform, when the full support is stored.
    pub symbol_min: Option<f64>,
    pub symbol_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DecompositionSet {
    pub params: Parameters,
    pub strategy: Strategy,
    pub n_max: u32,
    pub tol: f64,
    pub window: u32,
    pub gammas: Vec<KernelTable>,
    /// C_n for n = 0..=n_max+1 computed directly from the subordination integral.
    pub direct: Vec<KernelTable>,
    pub residual_report: Vec<ResidualEntry>,
    /// sup |C − Σ_{n≤n_max} L^{−2nd_s}Γ_n(·/L^n) − L^{−2(n_max+1)d_s}C_{n_max+1}(·/L^{n_max+1})|.
    pub reconstruction_residual: f64,
    pub worst_offset: Site,
    /// Same without the remainder term.
    pub bare_residual: f64,
    /// max_n ‖Γ_n‖∞ Σ_{n>n_max} L^{−2nd_s}.
    pub tail_bound: f64,
}

impl DecompositionSet {
    /// Assembles a set from Γ_0..=Γ_{n_max} and C_0..=C_{n_max+1}, recomputing the
    /// recursion and reconstruction checks. Used for tables loaded from a cache.
    pub fn from_tables(
        params: &Parameters,
        strategy: Strategy,
        tol: f64,
        opts: &DecomposeOptions,
        gammas: Vec<KernelTable>,
        direct: Vec<KernelTable>,
    ) -> Result<Self, CovError> {
        if gammas.is_empty() || direct.len() != gammas.len() + 1 {
            return Err(CovError::InvalidParameter(format!(
                "{} pieces need {} tails, got {}",
                gammas.len(),
                gammas.len() + 1,
                direct.len()
            )));
        }
        if gammas
            .iter()
            .chain(&direct)
            .any(|t| t.extent != opts.extent)
        {
            return Err(CovError::InvalidParameter(
                "tables differ from the requested extent".into(),
            ));
        }
        let n_max = gammas.len() as u32 - 1;
        let keys = octant_keys(opts.extent);
        let lf = params.lf();
        let two_ds = 2.0 * params.d_s();
        let mut residual_report = Vec::new();
        let shrink = lf.powf(-two_ds);
        for n in 0..=n_max as usize {
            let mut worst: f64 = 0.0;
            for &k in &keys {
                let r = direct[n].at(k) - gammas[n].at(k) - shrink * direct[n + 1].at(k);
                worst = worst.max(r.abs());
            }
            let sym = (n as u32 <= opts.pd_max_scale)
                .then(|| symbol_range(&gammas[n]))
                .flatten();
            residual_report.push(ResidualEntry {
                n: n as u32,
                recursion_residual: worst,
                tail_mass: gammas[n].meta.tail_mass,
                sup_gamma: gammas[n].sup_norm(),
                symbol_min: sym.map(|s| s.0),
                symbol_max: sym.map(|s| s.1),
            });
            if worst > tol {
                return Err(CovError::Residual {
                    n: n as u32,
                    offset: [0; 3],
                    value: worst,
                    tol,
                });
            }
        }

        let (mut rec, mut bare, mut worst_offset) = (0.0f64, 0.0f64, [0i64; 3]);
        for &k in keys.iter().filter(|k| k[0] <= opts.window) {
            let mut sum = 0.0;
            for (n, g) in gammas.iter().enumerate() {
                sum += lf.powf(-two_ds * n as f64) * g.at(k);
            }
            let c = direct[0].at(k);
            let b = (c - sum).abs();
            let r = (c
                - sum
                - lf.powf(-two_ds * (n_max + 1) as f64) * direct[n_max as usize + 1].at(k))
            .abs();
            bare = bare.max(b);
            if r > rec {
                rec = r;
                worst_offset = k.map(|v| v as i64);
            }
        }
        if rec > tol {
            return Err(CovError::Residual {
                n: n_max,
                offset: worst_offset,
                value: rec,
                tol,
            });
        }
        let gmax = gammas.iter().map(|g| g.sup_norm()).fold(0.0, f64::max);
        let q = lf.powf(-two_ds);
        let tail_bound = gmax * q.powi(n_max as i32 + 1) / (1.0 - q);

        Ok(DecompositionSet {
            params: params.clone(),
            strategy,
            n_max,
            tol,
            window: opts.window,
            gammas,
            direct,
            residual_report,
            reconstruction_residual: rec,
            worst_offset,
            bare_residual: bare,
            tail_bound,
        })
    }

    pub fn remainder(&self) -> &KernelTable {
        &self.direct[self.n_max as usize + 1]
    }

    pub fn extent(&self) -> u32 {
        self.gammas[0].extent
    }
}

/// Unscaled pieces and tails C_{≥n} at one offset, in unit-lattice units.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPieces {
    pub pieces: Vec<f64>,
    pub tails: Vec<f64>,
}

/// Evaluates pieces of either strategy from one subordination quadrature.
#[derive(Debug, Clone)]
pub struct PieceEvaluator {
    pub strategy: Strategy,
    pub l: u32,
    pub n_max: u32,
    pub quad: Subordination,
    pa_profiles: Vec<Vec<f64>>,
    pa_half: Vec<usize>,
}

impl PieceEvaluator {
    pub fn new(
        params: &Parameters,
        strategy: Strategy,
        n_max: u32,
        kmax: usize,
        spec: QuadratureSpec,
    ) -> Result<Self, CovError> {
        params.validate()?;
        let s = window_scale(strategy);
        let l2 = (params.l as f64).powi(2);
        let breaks: Vec<f64> = (1..=n_max + 1).map(|j| s * l2.powi(j as i32)).collect();
        let quad = Subordination::new(params.alpha(), kmax, &breaks, spec)?;
        let pa_half: Vec<usize> = (0..=n_max)
            .map(|n| support_radius(params.l, n) as usize / 2)
            .collect();
        let pa_profiles = match strategy {
            Strategy::SpectralWindow => Vec::new(),
            Strategy::PositionAverage => quad
                .nodes
                .par_iter()
                .map(|node| {
                    if node.window > n_max as usize {
                        return Vec::new();
                    }
                    autoconvolution(node.t, pa_half[node.window], kmax)
                })
                .collect(),
        };
        Ok(PieceEvaluator {
            strategy,
            l: params.l,
            n_max,
            quad,
            pa_profiles,
            pa_half,
        })
    }

    pub fn evaluate(&self, k: [u32; 3]) -> Result<PointPieces, CovError> {
        let x = k.map(|v| v as i64);
        let ws = self.quad.window_sums(x)?;
        Ok(match self.strategy {
            Strategy::SpectralWindow => self.spectral_window(k[0] as u64, &ws),
            Strategy::PositionAverage => self.position_average(k, &ws),
        })
    }

    fn spectral_window(&self, m: u64, ws: &WindowSums) -> PointPieces {
        let n_max = self.n_max as usize;
        let mut pieces = Vec::with_capacity(n_max + 1);
        let mut tails = Vec::with_capacity(n_max + 2);
        for n in 0..=n_max + 1 {
            // |x| < r_{n−1} = L^n/2 ⇔ 2|x| < L^n.
            let inner = 2 * m < lpow(self.l, n as u32);
            let lo = if n == 0 {
                TimeBound::Zero
            } else {
                TimeBound::Break(n)
            };
            tails.push(if inner {
                ws.integral(lo, TimeBound::Infinity)
            } else {
                ws.total()
            });
            if n <= n_max {
                let hi = TimeBound::Break(n + 1);
                let p = if inner {
                    ws.integral(lo, hi)
                } else if 2 * m < lpow(self.l, n as u32 + 1) {
                    ws.integral(TimeBound::Zero, hi)
                } else {
                    0.0
                };
                pieces.push(p);
            }
        }
        PointPieces { pieces, tails }
    }

    fn position_average(&self, k: [u32; 3], ws: &WindowSums) -> PointPieces {
        let idx = k.map(|v| v as usize);
        let sums = self.quad.node_window_sums(idx, &self.pa_profiles);
        let n_max = self.n_max as usize;
        let mut pieces = Vec::with_capacity(n_max + 1);
        let mut tails = vec![ws.total()];
        for n in 0..=n_max {
            let mut p = sums[n];
            if n == 0 && idx.iter().all(|&c| c <= 2 * self.pa_half[0]) {
                p += self.quad.small_time(idx);
            }
            tails.push(tails[n] - p);
            pieces.push(p);
        }
        PointPieces { pieces, tails }
    }

    /// Mass removed by hard truncation of piece n.
    pub fn truncation_mass(&self, n: u32) -> f64 {
        match self.strategy {
            Strategy::SpectralWindow => self.quad.escape_mass(
                TimeBound::Break(n as usize + 1),
                support_radius(self.l, n) as usize + 1,
            ),
            Strategy::PositionAverage => {
                let h = self.pa_half[n as usize];
                self.quad
                    .nodes
                    .par_iter()
                    .filter(|node| node.window == n as usize)
                    .map(|node| {
                        let len = h + 31 + (9.0 * node.t.sqrt()).ceil() as usize;
                        let q = scaled_bessel_i(node.t, len);
                        let out = 2.0 * q[h + 1..].iter().sum::<f64>();
                        node.weight * (1.0 - (1.0 - out).powi(6))
                    })
                    .sum()
            }
        }
    }
}

/// Σ_{|b|≤h, |a−b|≤h} q(b) q(a−b) for a = 0..=amax, q(b) = e^{−t} I_b(t).
fn autoconvolution(t: f64, h: usize, amax: usize) -> Vec<f64> {
    let q = scaled_bessel_i(t, h);
    let h = h as i64;
    (0..=amax.min(2 * h as usize) as i64)
        .map(|a| {
            let lo = (a - h).max(-h);
            let hi = h.min(a + h);
            (lo..=hi)
                .map(|b| q[b.unsigned_abs() as usize] * q[(a - b).unsigned_abs() as usize])
                .sum()
        })
        .collect()
}

/// Γ_0..Γ_{n_max} with default options.
pub fn decompose(
    params: &Parameters,
    n_max: u32,
    strategy: Strategy,
    tol: f64,
) -> Result<DecompositionSet, CovError> {
    decompose_with(params, n_max, strategy, tol, &DecomposeOptions::default())
}

pub fn decompose_with(
    params: &Parameters,
    n_max: u32,
    strategy: Strategy,
    tol: f64,
    opts: &DecomposeOptions,
) -> Result<DecompositionSet, CovError> {
    if !(tol > 0.0) {
        return Err(CovError::InvalidParameter("tol must be positive".into()));
    }
    if opts.window > opts.extent {
        return Err(CovError::InvalidParameter(
            "test window exceeds table extent".into(),
        ));
    }
    let eval = PieceEvaluator::new(
        params,
        strategy,
        n_max,
        opts.extent as usize,
        opts.quadrature,
    )?;
    let keys = octant_keys(opts.extent);
    let points: Vec<PointPieces> = keys
        .par_iter()
        .map(|&k| eval.evaluate(k))
        .collect::<Result<_, _>>()?;
    let lf = params.lf();
    let two_ds = 2.0 * params.d_s();
    let meta = TableMeta::new(params, strategy);

    let mut gammas = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let f = lf.powf(two_ds * n as f64);
        let values = points.iter().map(|p| f * p.pieces[n as usize]).collect();
        let mut m = meta.clone();
        m.tail_mass = eval.truncation_mass(n);
        gammas.push(KernelTable::from_values(
            params.scale(n),
            opts.extent,
            Some(support_radius(params.l, n)),
            values,
            m,
        )?);
    }
    let mut direct = Vec::with_capacity(n_max as usize + 2);
    for n in 0..=n_max + 1 {
        let f = lf.powf(two_ds * n as f64);
        let values = points.iter().map(|p| f * p.tails[n as usize]).collect();
        direct.push(KernelTable::from_values(
            params.scale(n),
            opts.extent,
            None,
            values,
            meta.clone(),
        )?);
    }

    DecompositionSet::from_tables(params, strategy, tol, opts, gammas, direct)
}

/// C_n assembled as Σ_j L^{−2jd_s} Γ_{n+j} plus the rescaled remainder.
pub fn c_n_table(dec: &DecompositionSet, n: u32, extent: u32) -> Result<KernelTable, CovError> {
    if n > dec.n_max + 1 {
        return Err(CovError::InsufficientDepth {
            have: dec.n_max,
            want: n,
        });
    }
    if extent > dec.extent() {
        return Err(CovError::InvalidParameter(format!(
            "extent {extent} beyond stored {}",
            dec.extent()
        )));
    }
    let lf = dec.params.lf();
    let two_ds = 2.0 * dec.params.d_s();
    let rem = dec.remainder();
    let meta = dec.gammas[0].meta.clone();
    KernelTable::from_fn(dec.params.scale(n), extent, None, meta, |k| {
        let mut v = lf.powf(-two_ds * (dec.n_max + 1 - n) as f64) * rem.at(k);
        for j in (n..=dec.n_max).rev() {
            v += lf.powf(-two_ds * (j - n) as f64) * dec.gammas[j as usize].at(k);
        }
        Ok(v)
    })
}

/// S_L: a scale-(n+1) table becomes a scale-n table with the same integer
/// offsets, multiplied by L^{−2d_s}.
pub fn rescale_covariance(
    table: &KernelTable,
    params: &Parameters,
) -> Result<KernelTable, CovError> {
    check_lattice(table, params)?;
    if table.scale.n == 0 {
        return Err(CovError::NoCoarserScale(0));
    }
    let mut out = table.scaled(params.lf().powf(-2.0 * params.d_s()));
    out.scale.n -= 1;
    Ok(out)
}

/// Inverse of [`rescale_covariance`].
pub fn inverse_rescale(table: &KernelTable, params: &Parameters) -> Result<KernelTable, CovError> {
    check_lattice(table, params)?;
    let mut out = table.scaled(params.lf().powf(2.0 * params.d_s()));
    out.scale.n += 1;
    Ok(out)
}

fn check_lattice(table: &KernelTable, params: &Parameters) -> Result<(), CovError> {
    if table.scale.l != params.l {
        return Err(CovError::InvalidParameter(format!(
            "table built for L = {}, params have L = {}",
            table.scale.l, params.l
        )));
    }
    Ok(())
}

/// sup_x |∂^m K(x)| for m = 0, 1, 2 with lattice derivatives at the table's scale,
/// over offsets whose stencil is available.
pub fn derivative_sups(table: &KernelTable) -> [f64; 3] {
    let inv = table.scale.inv_spacing() as f64;
    let dirs: Vec<Site> = (0..3)
        .flat_map(|a| {
            [1i64, -1].map(move |s| {
                let mut e = [0; 3];
                e[a] = s;
                e
            })
        })
        .collect();
    let add = |x: Site, e: Site| [x[0] + e[0], x[1] + e[1], x[2] + e[2]];
    let mut out = [0.0f64; 3];
    for k in table.keys() {
        let x = k.map(|v| v as i64);
        let f0 = table.at(k);
        out[0] = out[0].max(f0.abs());
        for &d1 in &dirs {
            let Some(f1) = table.get(add(x, d1)) else {
                continue;
            };
            out[1] = out[1].max(inv * (f1 - f0).abs());
            for &d2 in &dirs {
                let (Some(f2), Some(f12)) = (table.get(add(x, d2)), table.get(add(add(x, d1), d2)))
                else {
                    continue;
                };
                out[2] = out[2].max(inv * inv * (f12 - f1 - f2 + f0).abs());
            }
        }
    }
    out
}
