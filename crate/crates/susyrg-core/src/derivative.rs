use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::Field3;
use crate::Site;

/// Signed lattice axis μ ∈ {±1, ±2, ±3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction(i8);

impl Direction {
    pub fn new(mu: i8) -> Result<Self, CoreError> {
        if mu != 0 && mu.abs() <= 3 {
            Ok(Direction(mu))
        } else {
            Err(CoreError::InvalidParameter(format!(
                "direction {mu} not in ±1..±3"
            )))
        }
    }

    pub fn forward(axis: usize) -> Self {
        Direction(axis as i8 + 1)
    }

    pub fn backward(axis: usize) -> Self {
        Direction(-(axis as i8 + 1))
    }

    pub fn axis(&self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn sign(&self) -> i64 {
        self.0.signum() as i64
    }

    pub fn value(&self) -> i8 {
        self.0
    }

    pub fn shift(&self, x: Site) -> Site {
        let mut y = x;
        y[self.axis()] += self.sign();
        y
    }

    /// The six directions S = {1,−1,2,−2,3,−3}.
    pub fn all() -> [Direction; 6] {
        [1, -1, 2, -2, 3, -3].map(Direction)
    }
}

/// δ⁻¹(f(x ± δe_μ) − f(x)) at a single site.
pub fn derivative_at<T>(f: &Field3<T>, x: Site, dir: Direction) -> Result<T, CoreError>
where
    T: Copy + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    let inv = f.scale.inv_spacing() as f64;
    Ok((f.get(dir.shift(x))? - f.get(x)?) * inv)
}

/// Forward (μ > 0) or backward (μ < 0) lattice derivative. Sites whose
/// shifted neighbour is unavailable are left out of the result.
pub fn lattice_derivative<T>(f: &Field3<T>, dir: Direction) -> Field3<T>
where
    T: Copy + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    let mut out = Field3::new(f.scale, f.lo, f.dims, f.mode);
    for i in 0..f.len() {
        let x = out.site_of(i);
        match derivative_at(f, x, dir) {
            Ok(v) => out.set(x, v).expect("site inside box"),
            Err(_) => out.remove(x),
        }
    }
    out
}

/// One summand: `weight · ∂_{dirs[0]} ∂_{dirs[1]} … f(site)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTerm {
    pub weight: f64,
    pub site: Site,
    pub dirs: Vec<Direction>,
}

impl TaylorTerm {
    pub fn evaluate<T>(&self, f: &Field3<T>) -> Result<T, CoreError>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        Ok(apply_dirs(f, self.site, &self.dirs)? * self.weight)
    }
}

fn apply_dirs<T>(f: &Field3<T>, x: Site, dirs: &[Direction]) -> Result<T, CoreError>
where
    T: Copy + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    match dirs.split_first() {
        None => f.get(x),
        Some((d, rest)) => {
            let inv = f.scale.inv_spacing() as f64;
            Ok((apply_dirs(f, d.shift(x), rest)? - apply_dirs(f, x, rest)?) * inv)
        }
    }
}

/// Lattice-path expansion of f(y) − f(x).
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion<T> {
    pub value: T,
    /// Terms with a single derivative.
    pub first_order: Vec<TaylorTerm>,
    /// Second-derivative terms (empty for order 1).
    pub remainder: Vec<TaylorTerm>,
}

impl<T> TaylorExpansion<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    pub fn reconstruct(&self, f: &Field3<T>) -> Result<T, CoreError> {
        let mut acc = T::default();
        for t in self.first_order.iter().chain(&self.remainder) {
            acc = acc + t.evaluate(f)?;
        }
        Ok(acc)
    }
}

/// Path p_j(v, s): full components of v along axes before j, then s steps along j.
fn path_point(v: Site, j: usize, s: i64) -> Site {
    let mut p = [0i64; 3];
    for i in 0..j {
        p[i] = v[i];
    }
    p[j] = v[j].signum() * s;
    p
}

fn add(a: Site, b: Site) -> Site {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Axis-by-axis telescoping of f(y) − f(x); `order` 1 gives single-derivative
/// terms along the path, `order` 2 splits off derivatives at x plus second
/// differences along nested paths. Both reproduce f(y) − f(x) exactly.
pub fn taylor_path_expand<T>(
    f: &Field3<T>,
    x: Site,
    y: Site,
    order: u8,
) -> Result<TaylorExpansion<T>, CoreError>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    if !(order == 1 || order == 2) {
        return Err(CoreError::InvalidParameter(format!(
            "order {order} not in {{1,2}}"
        )));
    }
    let value = f.get(y)? - f.get(x)?;
    let v = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
    let delta = f.scale.spacing();
    let dir = |j: usize, comp: i64| {
        if comp >= 0 {
            Direction::forward(j)
        } else {
            Direction::backward(j)
        }
    };
    let mut first_order = Vec::new();
    let mut remainder = Vec::new();
    for j in 0..3 {
        let h = v[j].abs();
        if h == 0 {
            continue;
        }
        let dj = dir(j, v[j]);
        if order == 1 {
            for s in 0..h {
                first_order.push(TaylorTerm {
                    weight: delta,
                    site: add(x, path_point(v, j, s)),
                    dirs: vec![dj],
                });
            }
            continue;
        }
        first_order.push(TaylorTerm {
            weight: delta * h as f64,
            site: x,
            dirs: vec![dj],
        });
        for s in 0..h {
            // ∂_j f(x + p) − ∂_j f(x), telescoped along the path to p.
            let p = path_point(v, j, s);
            for k in 0..3 {
                let hk = p[k].abs();
                if hk == 0 {
                    continue;
                }
                let dk = dir(k, p[k]);
                for sk in 0..hk {
                    remainder.push(TaylorTerm {
                        weight: delta * delta,
                        site: add(x, path_point(p, k, sk)),
                        dirs: vec![dk, dj],
                    });
                }
            }
        }
    }
    for t in first_order.iter().chain(&remainder) {
        apply_dirs(f, t.site, &t.dirs)?;
    }
    Ok(TaylorExpansion {
        value,
        first_order,
        remainder,
    })
}
