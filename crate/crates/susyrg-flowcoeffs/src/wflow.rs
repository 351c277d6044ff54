use std::io::Write;

use susyrg_covariance::{lpow, octant_keys, support_radius, DecompositionSet, KernelTable};

use crate::coefficients::FlowCoefficients;
use crate::vkernels::v_kernels;
use crate::FlowError;

/// Kernel-flow state w_n on the scale-n lattice.
#[derive(Debug, Clone)]
pub struct WKernels {
    pub n: u32,
    pub w: [KernelTable; 3],
    /// ‖w^{(p)}‖_{p,n} for p = 1, 2, 3.
    pub norms: [f64; 3],
    /// max over p.
    pub norm: f64,
}

/// sup_X (|X|∞ δ_n + δ_n)^{(6p+1)/4} |w^{(p)}[X]|.
pub fn weighted_norm(table: &KernelTable, p: u32) -> f64 {
    let delta = table.scale.spacing();
    let e = (6 * p + 1) as f64 / 4.0;
    table.keys().into_iter().fold(0.0, |m, k| {
        m.max(((k[0] as f64 + 1.0) * delta).powf(e) * table.at(k).abs())
    })
}

impl WKernels {
    fn new(n: u32, w: [KernelTable; 3]) -> Self {
        let norms = [1, 2, 3].map(|p| weighted_norm(&w[p as usize - 1], p));
        let norm = norms.iter().copied().fold(0.0, f64::max);
        WKernels { n, w, norms, norm }
    }

    pub fn zero(dec: &DecompositionSet) -> Self {
        let meta = dec.gammas[0].meta.clone();
        let t = KernelTable::from_values(dec.params.scale(0), 0, Some(0), vec![0.0], meta)
            .expect("single value");
        WKernels::new(0, [t.clone(), t.clone(), t])
    }
}

/// w_{n+1} = v_{n+1} + w_{n,L} with w_{n,L}[X] = L^{2d_s} w_n[X] in integer units,
/// for n = 0..n_max. With a zero start the result is checked against
/// w_n = Σ_{j<n} L^{2jd_s} v_{n−j}.
pub fn w_flow(
    dec: &DecompositionSet,
    n_max: u32,
    w0: Option<&WKernels>,
) -> Result<Vec<WKernels>, FlowError> {
    if n_max > dec.n_max + 1 {
        return Err(FlowError::Window(format!(
            "w_{n_max} needs v up to scale {}, decomposition has {}",
            n_max,
            dec.n_max + 1
        )));
    }
    let up = dec.params.lf().powf(2.0 * dec.params.d_s());
    let zero = WKernels::zero(dec);
    let start = w0.unwrap_or(&zero);
    let vs = (0..n_max)
        .map(|n| v_kernels(dec, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![start.clone()];
    for n in 0..n_max as usize {
        let prev = &out[n];
        let v = &vs[n];
        let r = v.v[0].extent.max(prev.w[0].extent);
        let w = [0usize, 1, 2].map(|i| {
            let meta = v.v[i].meta.clone();
            KernelTable::from_fn(v.v[i].scale, r, Some(r), meta, |k| {
                let x = k.map(|c| c as i64);
                Ok(v.v[i].get(x).unwrap_or(0.0) + up * prev.w[i].get(x).unwrap_or(0.0))
            })
            .expect("table shape")
        });
        out.push(WKernels::new(n as u32 + 1, w));
    }
    if w0.is_none() {
        for (n, wk) in out.iter().enumerate().skip(1) {
            for i in 0..3 {
                let t = &wk.w[i];
                let scale = t.sup_norm().max(f64::MIN_POSITIVE);
                for k in t.keys() {
                    let x = k.map(|c| c as i64);
                    let closed: f64 = (0..n)
                        .map(|j| up.powi(j as i32) * vs[n - j - 1].v[i].get(x).unwrap_or(0.0))
                        .sum();
                    if (closed - t.at(k)).abs() > 1e-12 * scale {
                        return Err(FlowError::Mismatch {
                            n: n as u32,
                            p: i as u32 + 1,
                            offset: k,
                            difference: (closed - t.at(k)).abs(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// sup over p and y ≠ 0 on the scale-l window |y| < 1/2 of |w_{n+1}(y) − w_n(y)|,
/// for consecutive n ≥ l.
pub fn coarse_window_differences(ws: &[WKernels], l: u32) -> Vec<f64> {
    let Some(first) = ws.first() else {
        return Vec::new();
    };
    let lbase = first.w[0].scale.l;
    if l == 0 {
        return Vec::new();
    }
    let keys: Vec<[u32; 3]> = octant_keys(support_radius(lbase, l - 1))
        .into_iter()
        .filter(|k| k[0] > 0)
        .collect();
    let at = |wk: &WKernels, i: usize, k: [u32; 3]| -> Option<f64> {
        let s = lpow(lbase, wk.n.checked_sub(l)?) as i64;
        wk.w[i].get(k.map(|c| c as i64 * s))
    };
    ws.windows(2)
        .filter(|pair| pair[0].n >= l)
        .map(|pair| {
            let mut m: f64 = 0.0;
            for i in 0..3 {
                for &k in &keys {
                    if let (Some(a), Some(b)) = (at(&pair[0], i, k), at(&pair[1], i, k)) {
                        m = m.max((a - b).abs());
                    }
                }
            }
            m
        })
        .collect()
}

/// CSV with columns n, a_n, b_n, |a_n − a_star|, ‖w_n‖_n.
pub fn write_csv<W: Write>(
    coeffs: &FlowCoefficients,
    ws: &[WKernels],
    out: W,
) -> Result<(), FlowError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["n", "a_n", "b_n", "abs_a_n_minus_a_star", "w_norm"])?;
    for (i, (a, b)) in coeffs.a.iter().zip(&coeffs.b).enumerate() {
        let n = coeffs.first + i as u32;
        let wn = ws
            .iter()
            .find(|w| w.n == n)
            .map(|w| format!("{:.17e}", w.norm))
            .unwrap_or_default();
        wr.write_record([
            n.to_string(),
            format!("{a:.17e}"),
            format!("{b:.17e}"),
            format!("{:.17e}", (a - coeffs.a_star).abs()),
            wn,
        ])?;
    }
    wr.flush()?;
    Ok(())
}
