//! Dense Brillouin-zone summation, used as a cross-check and for
//! positive-definiteness tests of finite-range kernels.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::CovError;
use crate::gauss::gauss_legendre;
use crate::table::{KernelTable, TableMeta};

/// In-place 3D DFT of an n×n×n array in x-fastest order.
pub fn fft3(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let strides = [1, n, n * n];
    for axis in 0..3 {
        let s = strides[axis];
        let (o1, o2) = match axis {
            0 => (n, n * n),
            1 => (1, n * n),
            _ => (1, n),
        };
        for i in 0..n {
            for j in 0..n {
                let base = i * o1 + j * o2;
                for k in 0..n {
                    line[k] = data[base + k * s];
                }
                fft.process(&mut line);
                for k in 0..n {
                    data[base + k * s] = line[k];
                }
            }
        }
    }
}

/// ∫_{[−½,½]³} |u|^{−α} du, via the divergence theorem on the cube faces.
pub fn cube_singularity_average(alpha: f64) -> f64 {
    let (x, w) = gauss_legendre(48);
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let (v, u) = (0.5 * x[i], 0.5 * x[j]);
            s += 0.25 * w[i] * w[j] * (0.25 + v * v + u * u).powf(-alpha / 2.0);
        }
    }
    3.0 * s / (3.0 - alpha)
}

/// C(x) for |x|∞ ≤ extent from a 2M-periodic momentum grid, the p = 0 cell
/// replaced by the cell average of |p|^{−α}.
pub fn spectral_greens(
    alpha: f64,
    half_extent: usize,
    extent: u32,
    meta: TableMeta,
    scale: susyrg_core::ScaleIndex,
) -> Result<KernelTable, CovError> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(CovError::InvalidParameter(format!(
            "alpha = {alpha} outside (0, 2)"
        )));
    }
    let n = 2 * half_extent;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    if (extent as usize) * 4 > half_extent {
        return Err(CovError::GridTooSmall {
            extent,
            half_extent,
            aliasing: aliasing_estimate(alpha, half_extent),
        });
    }
    let cosines: Vec<f64> = (0..n).map(|k| (h * k as f64).cos()).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
    for c in 0..n {
        for b in 0..n {
            for a in 0..n {
                let lam = 2.0 * (3.0 - cosines[a] - cosines[b] - cosines[c]);
                let v = if a == 0 && b == 0 && c == 0 {
                    h.powf(-alpha) * cube_singularity_average(alpha)
                } else {
                    lam.powf(-alpha / 2.0)
                };
                data[a + n * (b + n * c)] = Complex64::new(v, 0.0);
            }
        }
    }
    fft3(&mut data, n);
    let norm = 1.0 / (n * n * n) as f64;
    KernelTable::from_fn(scale, extent, None, meta, |k| {
        let [a, b, c] = k.map(|v| v as usize);
        Ok(data[a + n * (b + n * c)].re * norm)
    })
}

/// Leading size of the error from the cells next to the singularity.
pub fn aliasing_estimate(alpha: f64, half_extent: usize) -> f64 {
    let h = std::f64::consts::PI / half_extent as f64;
    h.powf(3.0 - alpha) / (2.0 * std::f64::consts::PI).powi(3)
}

/// Minimum and maximum of the discrete transform of a finite-range table.
pub fn symbol_range(table: &KernelTable) -> Option<(f64, f64)> {
    let r = table.support?;
    if r > table.extent {
        return None;
    }
    let n = 2 * (r as usize + 1);
    let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
    let r = r as i64;
    for c in -r..=r {
        for b in -r..=r {
            for a in -r..=r {
                let v = table.get([a, b, c])?;
                let idx = |x: i64| x.rem_euclid(n as i64) as usize;
                data[idx(a) + n * (idx(b) + n * idx(c))] = Complex64::new(v, 0.0);
            }
        }
    }
    fft3(&mut data, n);
    Some(
        data.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
                (lo.min(z.re), hi.max(z.re))
            }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Strategy;
    use susyrg_core::{Parameters, ScaleIndex};

    #[test]
    fn singular_cell_average_closed_form_at_zero() {
        assert!((cube_singularity_average(1e-12) - 1.0).abs() < 1e-10);
        // |u|^{-2}: exact 2π inside the inscribed ball, midpoint sum outside it.
        let m = 200;
        let mut s = 2.0 * std::f64::consts::PI * (m * m * m) as f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let u = [i, j, k].map(|q| (q as f64 + 0.5) / m as f64 - 0.5);
                    let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                    if r2 >= 0.25 {
                        s += 1.0 / r2;
                    }
                }
            }
        }
        s /= (m * m * m) as f64;
        assert!((cube_singularity_average(2.0) - s).abs() < 1e-3 * s);
    }

    #[test]
    fn fft_of_delta_is_flat() {
        let n = 6;
        let mut d = vec![Complex64::new(0.0, 0.0); n * n * n];
        d[0] = Complex64::new(1.0, 0.0);
        fft3(&mut d, n);
        assert!(d
            .iter()
            .all(|z| (z.re - 1.0).abs() < 1e-15 && z.im.abs() < 1e-15));
    }

    #[test]
    fn guard_rejects_small_grids() {
        let p = Parameters::new(3, 0.5).unwrap();
        let meta = TableMeta::new(&p, Strategy::SpectralWindow);
        let e = spectral_greens(p.alpha(), 8, 4, meta, ScaleIndex::new(3, 0));
        assert!(matches!(e, Err(CovError::GridTooSmall { .. })));
    }
}
