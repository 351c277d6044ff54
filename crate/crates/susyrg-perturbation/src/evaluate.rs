//! Evaluation of species-0 elements at bosonic fields, and of the Q kernels on block pairs.

use num_complex::Complex64;
use serde::Serialize;
use susyrg_core::{sup_norm, ScaleIndex, Site};
use susyrg_covariance::KernelTable;
use susyrg_superalgebra::{Element, Kind, Scalar, MAX_SITES};

use crate::kernels::{hat_x, q11, q22, q33, Matrix};
use crate::PerturbError;

/// Value of `e` at φ, φ̄ on species 0 with every fermion and every species-1 field set to zero.
pub fn evaluate_bosonic<C: Scalar>(e: &Element<C>, phi: &[C], phibar: &[C]) -> C {
    let mut total = C::zero();
    for (m, c) in e.terms() {
        if m.fermion_mask() != 0 || m.involves_species(1) {
            continue;
        }
        let mut t = c.clone();
        for v in m.vars() {
            let x = if v.kind == Kind::Phi {
                &phi[v.site as usize]
            } else {
                &phibar[v.site as usize]
            };
            t = t * x.clone();
        }
        total = total + t;
    }
    total
}

/// Value of a real element at a complex field with φ̄ = conj(φ), fermions set to zero.
pub fn evaluate_complex(e: &Element<f64>, phi: &[Complex64]) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (m, c) in e.terms() {
        if m.fermion_mask() != 0 || m.involves_species(1) {
            continue;
        }
        let mut t = Complex64::new(*c, 0.0);
        for v in m.vars() {
            let z = phi[v.site as usize];
            let x = if v.kind == Kind::Phi { z } else { z.conj() };
            t *= x;
        }
        total += t;
    }
    total
}

/// Covariance C_n and kernels w_n^{(p)} (indexed p − 1) at one scale, with the coupling g_n.
#[derive(Debug, Clone)]
pub struct QKernelSpec {
    pub covariance: KernelTable,
    pub w: [KernelTable; 3],
    pub g: f64,
}

/// One block, or two blocks, of the unit lattice, given by their block indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    pub blocks: Vec<Site>,
}

impl BlockSet {
    /// Lattice points of every block at scale n, in block order.
    pub fn points(&self, scale: ScaleIndex) -> Vec<Vec<Site>> {
        self.blocks
            .iter()
            .map(|m| {
                let mut pts = Vec::new();
                for x in scale.block_range(m[0]) {
                    for y in scale.block_range(m[1]) {
                        for z in scale.block_range(m[2]) {
                            pts.push([x, y, z]);
                        }
                    }
                }
                pts
            })
            .collect()
    }

    /// Two distinct blocks at sup-distance one, or a single block.
    pub fn is_small_pair(&self) -> bool {
        match self.blocks.as_slice() {
            [_] => true,
            [a, b] => sup_norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) == 1,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValues {
    pub q11: Complex64,
    pub q22: Complex64,
    pub q33: Complex64,
    /// g²(q11 + q22 + q33).
    pub total: Complex64,
}

fn matrix(table: &KernelTable, pts: &[Site]) -> Result<Matrix<f64>, PerturbError> {
    pts.iter()
        .map(|x| {
            pts.iter()
                .map(|y| {
                    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                    table.get(d).ok_or(PerturbError::OutsideTable(d))
                })
                .collect()
        })
        .collect()
}

/// Q^{(1,1)}(w^{(3)}), Q^{(2,2)}(w^{(2)}), Q^{(3,3)}(w^{(1)}) on X̂ at a complex field φ
/// (one value per point, in the order of [`BlockSet::points`]). Sets that are neither one
/// block nor two touching blocks give zero.
pub fn eval_q(
    spec: &QKernelSpec,
    set: &BlockSet,
    phi: &[Complex64],
) -> Result<QValues, PerturbError> {
    let scale = spec.covariance.scale;
    let zero = Complex64::new(0.0, 0.0);
    if !set.is_small_pair() {
        return Ok(QValues {
            q11: zero,
            q22: zero,
            q33: zero,
            total: zero,
        });
    }
    let groups = set.points(scale);
    let pts: Vec<Site> = groups.iter().flatten().copied().collect();
    if pts.len() > MAX_SITES {
        return Err(PerturbError::TooManyPoints(pts.len()));
    }
    if phi.len() != pts.len() {
        return Err(PerturbError::FieldLength {
            expected: pts.len(),
            got: phi.len(),
        });
    }
    let mut next = 0;
    let blocks: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let idx = (next..next + g.len()).collect();
            next += g.len();
            idx
        })
        .collect();
    let xhat = hat_x(&blocks);
    let cov = matrix(&spec.covariance, &pts)?;
    let w = [
        matrix(&spec.w[0], &pts)?,
        matrix(&spec.w[1], &pts)?,
        matrix(&spec.w[2], &pts)?,
    ];
    let weight = scale.volume_element();
    let q11v = evaluate_complex(&q11(&xhat, &weight, &w[2]), phi);
    let q22v = evaluate_complex(&q22(&xhat, &weight, &w[1], &cov), phi);
    let q33v = evaluate_complex(&q33(&xhat, &weight, &w[0], &cov), phi);
    let total = (q11v + q22v + q33v) * (spec.g * spec.g);
    Ok(QValues {
        q11: q11v,
        q22: q22v,
        q33: q33v,
        total,
    })
}
