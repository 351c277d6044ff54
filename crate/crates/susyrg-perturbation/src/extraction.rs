//! F_Q = Q̃ − Q, its localized form, and the extraction of a_n, b_n from the v kernels.

use serde::Serialize;
use susyrg_core::{Parameters, ScaleIndex, Site};
use susyrg_flowcoeffs::{coefficients_from, VKernels};
use susyrg_superalgebra::{super_pair, Element, Scalar};

use crate::kernels::{q_tilde_total, q_total, Matrix};
use crate::PerturbError;

/// Q̃(v) − Q(v) with the same kernels and Wick covariance.
pub fn f_q<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    v: &[Matrix<C>; 3],
    cov: &Matrix<C>,
    g: &C,
) -> Element<C> {
    q_tilde_total(xhat, weight, v, cov, g).sub(&q_total(xhat, weight, v, cov, g))
}

/// 2g²∫∫[(ΦΦ̄)(x) + (ΦΦ̄)(y)]v^{(3)} + 4g²∫∫[:(ΦΦ̄)²(x): + :(ΦΦ̄)²(y):]v^{(2)}.
pub fn f_q_localized<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    v: &[Matrix<C>; 3],
    cov: &Matrix<C>,
    g: &C,
) -> Element<C> {
    let w2 = weight.clone() * weight.clone();
    let mut lin = Element::zero();
    let mut quart = Element::zero();
    for &(x, y) in xhat {
        let (a, b) = (super_pair::<C>(0, x, x), super_pair::<C>(0, y, y));
        lin = lin.add(&a.add(&b).scale(&(w2.clone() * v[2][x][y].clone())));
        quart = quart.add(
            &a.mul(&a)
                .add(&b.mul(&b))
                .scale(&(w2.clone() * v[1][x][y].clone())),
        );
    }
    let g2 = g.clone() * g.clone();
    let out = lin
        .scale(&C::from_i64(2))
        .add(&quart.wick_order(0, cov).scale(&C::from_i64(4)));
    out.scale(&g2)
}

/// Coefficients of ∫(ΦΦ̄)² and ∫ΦΦ̄ collected from F_Q over small sets containing a block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub n: u32,
    pub g: f64,
    /// 4g²Σ_X∫_{Δ'}v^{(2)} and 2g²Σ_X∫_{Δ'}v^{(3)}, averaged over x ∈ Δ.
    pub coefficients: [f64; 2],
    /// Contributions of X = Δ alone, averaged over x ∈ Δ.
    pub one_block: [f64; 2],
    /// Contributions of the 26 sets X = Δ ∪ Δ', averaged over x ∈ Δ.
    pub two_block: [f64; 2],
    /// 4g²∫v^{(2)} and 2g²∫v^{(3)} over all of ℤ³.
    pub unconstrained: [f64; 2],
    /// max over x ∈ Δ of the relative deviation from the average.
    pub spread: f64,
    /// Field-independent part of F_Q.
    pub constant: f64,
}

impl Extraction {
    /// Checks the coefficients against g²(a_n, b_n).
    pub fn check(&self, a: f64, b: f64, tol: f64) -> Result<(), PerturbError> {
        let g2 = self.g * self.g;
        for (what, got, want) in [
            ("a", self.coefficients[0], a * g2),
            ("b", self.coefficients[1], b * g2),
        ] {
            if (got - want).abs() > tol * want.abs().max(f64::MIN_POSITIVE) {
                return Err(PerturbError::Mismatch {
                    what: what.into(),
                    got,
                    want,
                });
            }
        }
        Ok(())
    }
}

fn block_sum(v: &VKernels, scale: ScaleIndex, x: Site, m: Site) -> Result<[f64; 2], PerturbError> {
    let mut s = [0.0; 2];
    for y0 in scale.block_range(m[0]) {
        for y1 in scale.block_range(m[1]) {
            for y2 in scale.block_range(m[2]) {
                let d = [x[0] - y0, x[1] - y1, x[2] - y2];
                for (slot, p) in [(0, 2), (1, 3)] {
                    s[slot] += v.get(p).get(d).ok_or(PerturbError::OutsideTable(d))?;
                }
            }
        }
    }
    Ok(s)
}

/// Sums f^{(p)}(x, X, Δ) = ∫_{Δ'} v^{(p)}(x − y) over X = Δ and X = Δ ∪ Δ' for x ∈ Δ,
/// on the scale-(n+1) lattice with unit blocks of L^{n+1} points per side.
pub fn extract_fq(v: &VKernels, params: &Parameters, g: f64) -> Result<Extraction, PerturbError> {
    let scale = params.scale(v.n + 1);
    let g2 = g * g;
    let factors = [4.0 * g2, 2.0 * g2];
    let per_point = |x: Site| -> Result<([f64; 2], [f64; 2]), PerturbError> {
        let one = block_sum(v, scale, x, [0, 0, 0])?;
        let mut two = [0.0; 2];
        for m0 in -1..=1 {
            for m1 in -1..=1 {
                for m2 in -1..=1 {
                    if [m0, m1, m2] == [0, 0, 0] {
                        continue;
                    }
                    let s = block_sum(v, scale, x, [m0, m1, m2])?;
                    two[0] += s[0];
                    two[1] += s[1];
                }
            }
        }
        let f = |s: [f64; 2]| {
            [
                factors[0] * scale.integrate(s[0]),
                factors[1] * scale.integrate(s[1]),
            ]
        };
        Ok((f(one), f(two)))
    };
    let mut values = Vec::new();
    for x0 in scale.block_range(0) {
        for x1 in scale.block_range(0) {
            for x2 in scale.block_range(0) {
                values.push(per_point([x0, x1, x2])?);
            }
        }
    }
    let count = values.len() as f64;
    let mean = |f: &dyn Fn(&([f64; 2], [f64; 2])) -> [f64; 2]| -> [f64; 2] {
        let s = values
            .iter()
            .map(f)
            .fold([0.0; 2], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        [s[0] / count, s[1] / count]
    };
    let one_block = mean(&|v| v.0);
    let two_block = mean(&|v| v.1);
    let coefficients = [one_block[0] + two_block[0], one_block[1] + two_block[1]];
    let mut spread: f64 = 0.0;
    for (o, t) in &values {
        for i in 0..2 {
            let dev = (o[i] + t[i] - coefficients[i]).abs()
                / coefficients[i].abs().max(f64::MIN_POSITIVE);
            spread = spread.max(dev);
        }
    }
    let (a, b) = coefficients_from(v);
    let unconstrained = [g2 * a, g2 * b];
    Ok(Extraction {
        n: v.n,
        g,
        coefficients,
        one_block,
        two_block,
        unconstrained,
        spread,
        constant: 0.0,
    })
}

/// Second-order update of the couplings: g' = g_{n,L}(1 − a g_{n,L}),
/// μ' = μ_{n,L} − b g_{n,L}², with g_{n,L} = L^ε g and μ_{n,L} = L^{(3+ε)/2} μ.
pub fn second_order_couplings(params: &Parameters, a: f64, b: f64, g: f64, mu: f64) -> (f64, f64) {
    let gl = params.lf().powf(params.eps) * g;
    (
        gl * (1.0 - a * gl),
        params.mass_multiplier() * mu - b * gl * gl,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::hat_x;
    use susyrg_superalgebra::{ratio, Rational};

    fn toy() -> (Vec<(usize, usize)>, [Matrix<Rational>; 3], Matrix<Rational>) {
        let m = |d: i64, o: i64| {
            vec![
                vec![ratio(d, 7), ratio(o, 11)],
                vec![ratio(o, 11), ratio(d, 7)],
            ]
        };
        (hat_x(&[vec![0, 1]]), [m(3, 1), m(2, -1), m(5, 2)], m(4, 1))
    }

    #[test]
    fn f_q_is_local() {
        let (xhat, v, cov) = toy();
        let w = ratio(1, 27);
        let g = ratio(2, 3);
        let fq = f_q(&xhat, &w, &v, &cov, &g);
        assert!(fq.sub(&f_q_localized(&xhat, &w, &v, &cov, &g)).is_empty());
        assert!(fq.constant_term().is_zero());
    }

    #[test]
    fn free_couplings_scale_linearly() {
        let p = Parameters::new(3, 0.5).unwrap();
        let (g, mu) = second_order_couplings(&p, 0.0, 0.0, 0.1, 0.2);
        assert!((g - 0.1 * 3f64.powf(0.5)).abs() < 1e-15);
        assert!((mu - 0.2 * 3f64.powf(1.75)).abs() < 1e-14);
    }
}
