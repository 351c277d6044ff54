//! Heat-kernel subordination of the fractional lattice Laplacian.
//!
//! (−Δ)^{−a} = Γ(a)^{−1} ∫_0^∞ t^{a−1} e^{tΔ} dt with a = α/2, and the lattice
//! heat kernel factorizes as Π_μ e^{−2t} I_{x_μ}(2t). The t-integral is split at
//! a set of breakpoints so that integrals over any union of windows are exact
//! sub-sums of one global quadrature.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::bessel::{hankel_coefficients, scaled_bessel_i};
use crate::error::CovError;
use crate::gauss::composite;
use susyrg_core::Site;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Maximal panel width in ln t.
    pub panel_width: f64,
    pub order: usize,
    /// Below this time the heat kernel is replaced by its leading power.
    pub t_small: f64,
    pub hankel_terms: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panel_width: 0.5,
            order: 16,
            t_small: 1e-12,
            hankel_terms: 10,
        }
    }
}

/// End point of a time window: 0, the j-th breakpoint (1-based) or ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeBound {
    Zero,
    Break(usize),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    /// GL weight × t^a / Γ(a).
    pub weight: f64,
    /// Index of the window containing t (0 for (t_small, T_1)).
    pub window: usize,
}

/// Contributions of one offset to each window, plus the analytic end pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSums {
    pub small: f64,
    pub windows: Vec<f64>,
    pub tail: f64,
}

impl WindowSums {
    pub fn integral(&self, lo: TimeBound, hi: TimeBound) -> f64 {
        let nw = self.windows.len();
        let (start, head) = match lo {
            TimeBound::Zero => (0, self.small),
            TimeBound::Break(i) => (i, 0.0),
            TimeBound::Infinity => return 0.0,
        };
        let (end, tail) = match hi {
            TimeBound::Zero => return 0.0,
            TimeBound::Break(j) => (j, 0.0),
            TimeBound::Infinity => (nw, self.tail),
        };
        if end <= start {
            return 0.0;
        }
        head + self.windows[start..end].iter().sum::<f64>() + tail
    }

    pub fn total(&self) -> f64 {
        self.integral(TimeBound::Zero, TimeBound::Infinity)
    }
}

#[derive(Debug, Clone)]
pub struct Subordination {
    pub a: f64,
    inv_gamma: f64,
    pub t_small: f64,
    pub t_large: f64,
    pub breakpoints: Vec<f64>,
    pub nodes: Vec<Node>,
    profiles: Vec<Vec<f64>>,
    pub kmax: usize,
    hankel: Vec<Vec<f64>>,
}

impl Subordination {
    /// Quadrature for offsets with |x|∞ ≤ kmax and the given increasing breakpoints.
    pub fn new(
        alpha: f64,
        kmax: usize,
        breakpoints: &[f64],
        spec: QuadratureSpec,
    ) -> Result<Self, CovError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(CovError::InvalidParameter(format!(
                "alpha = {alpha} outside (0, 2)"
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0])
            || breakpoints.iter().any(|&b| b <= spec.t_small)
        {
            return Err(CovError::InvalidParameter(
                "breakpoints must increase and exceed t_small".into(),
            ));
        }
        let a = alpha / 2.0;
        let inv_gamma = 1.0 / gamma(a);
        let last = breakpoints.last().copied().unwrap_or(0.0);
        let k1 = (kmax + 1) as f64;
        let t_large = (100.0 * k1 * k1).max(200.0).max(4.0 * last);
        let mut bounds = vec![spec.t_small.ln()];
        bounds.extend(breakpoints.iter().map(|b| b.ln()));
        bounds.push(t_large.ln());
        let mut nodes = Vec::new();
        for (w, pair) in bounds.windows(2).enumerate() {
            let panels = ((pair[1] - pair[0]) / spec.panel_width).ceil().max(1.0) as usize;
            for (u, wt) in composite(pair[0], pair[1], panels, spec.order) {
                let t = u.exp();
                nodes.push(Node {
                    t,
                    weight: wt * t.powf(a) * inv_gamma,
                    window: w,
                });
            }
        }
        let profiles = nodes
            .par_iter()
            .map(|n| scaled_bessel_i(2.0 * n.t, kmax))
            .collect();
        let hankel = (0..=kmax)
            .map(|nu| hankel_coefficients(nu as f64, spec.hankel_terms))
            .collect();
        Ok(Subordination {
            a,
            inv_gamma,
            t_small: spec.t_small,
            t_large,
            breakpoints: breakpoints.to_vec(),
            nodes,
            profiles,
            kmax,
            hankel,
        })
    }

    pub fn window_count(&self) -> usize {
        self.breakpoints.len() + 1
    }

    /// Per-node 1D factors e^{−2t} I_k(2t), k ≤ kmax.
    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    fn check(&self, x: Site) -> Result<[usize; 3], CovError> {
        let k = x.map(|c| c.unsigned_abs() as usize);
        if k.iter().any(|&c| c > self.kmax) {
            return Err(CovError::OutOfRange {
                offset: x,
                kmax: self.kmax,
            });
        }
        Ok(k)
    }

    /// Node sums per window using arbitrary per-node 1D profiles.
    pub fn node_window_sums(&self, k: [usize; 3], profiles: &[Vec<f64>]) -> Vec<f64> {
        let mut w = vec![0.0; self.window_count()];
        for (node, prof) in self.nodes.iter().zip(profiles) {
            let (Some(a), Some(b), Some(c)) = (prof.get(k[0]), prof.get(k[1]), prof.get(k[2]))
            else {
                continue;
            };
            w[node.window] += node.weight * a * b * c;
        }
        w
    }

    /// ∫_0^{t_small} t^{a−1} Π t^{k_μ}/k_μ! dt / Γ(a).
    pub fn small_time(&self, k: [usize; 3]) -> f64 {
        let s: usize = k.iter().sum();
        let e = self.a + s as f64;
        let fact: f64 = k
            .iter()
            .map(|&m| (1..=m).map(|i| i as f64).product::<f64>())
            .product();
        self.t_small.powf(e) / (e * fact) * self.inv_gamma
    }

    /// Hankel-series integral over (t_large, ∞).
    pub fn large_time(&self, k: [usize; 3]) -> f64 {
        let terms = self.hankel[0].len();
        let series = |nu: usize| -> Vec<f64> {
            self.hankel[nu]
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 0 { *c } else { -*c })
                .collect()
        };
        let (p, q, r) = (series(k[0]), series(k[1]), series(k[2]));
        let z = 2.0 * self.t_large;
        let mut total = 0.0;
        for m in 0..terms {
            let mut d = 0.0;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    d += p[i] * q[j] * r[m - i - j];
                }
            }
            let e = m as f64 + 1.5 - self.a;
            total += d * z.powf(-e) / e;
        }
        total * 2f64.powf(-self.a) * (2.0 * std::f64::consts::PI).powf(-1.5) * self.inv_gamma
    }

    pub fn window_sums(&self, x: Site) -> Result<WindowSums, CovError> {
        let k = self.check(x)?;
        Ok(WindowSums {
            small: self.small_time(k),
            windows: self.node_window_sums(k, &self.profiles),
            tail: self.large_time(k),
        })
    }

    /// C(x) = (−Δ)^{−α/2}(0, x).
    pub fn greens(&self, x: Site) -> Result<f64, CovError> {
        Ok(self.window_sums(x)?.total())
    }

    /// Γ(a)^{−1}∫_0^{hi} t^{a−1} P(|X_t|∞ ≥ r) dt for the lattice random walk X_t.
    pub fn escape_mass(&self, hi: TimeBound, r: usize) -> f64 {
        let end = match hi {
            TimeBound::Zero => return 0.0,
            TimeBound::Break(j) => j,
            TimeBound::Infinity => self.window_count(),
        };
        self.nodes
            .par_iter()
            .filter(|n| n.window < end)
            .map(|n| {
                let z = 2.0 * n.t;
                let len = r + 30 + (9.0 * z.sqrt()).ceil() as usize;
                let q = scaled_bessel_i(z, len);
                let p = 2.0 * q[r..].iter().sum::<f64>();
                n.weight * (3.0 * p - 3.0 * p * p + p * p * p)
            })
            .sum()
    }
}
