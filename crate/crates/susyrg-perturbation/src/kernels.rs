//! The second-order kernels Q^{(j,j)} and Q̃^{(j,j)} on a product domain X̂.

use susyrg_superalgebra::{super_pair, Element, Scalar};

/// A kernel or covariance restricted to the points of a toy: m[i][j] = u(x_i − x_j).
pub type Matrix<C> = Vec<Vec<C>>;

/// Δ×Δ for one block, (Δ1×Δ2) ∪ (Δ2×Δ1) for two, empty otherwise.
pub fn hat_x(blocks: &[Vec<usize>]) -> Vec<(usize, usize)> {
    match blocks {
        [d] => d
            .iter()
            .flat_map(|&x| d.iter().map(move |&y| (x, y)))
            .collect(),
        [a, b] => {
            let mut out: Vec<(usize, usize)> = a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| (x, y)))
                .collect();
            out.extend(b.iter().flat_map(|&x| a.iter().map(move |&y| (x, y))));
            out
        }
        _ => Vec::new(),
    }
}

fn pair<C: Scalar>(x: usize, y: usize) -> Element<C> {
    super_pair(0, x, y)
}

/// (Φ(x) − Φ(y))(Φ̄(x) − Φ̄(y)).
pub fn difference_pair<C: Scalar>(x: usize, y: usize) -> Element<C> {
    pair(x, x)
        .sub(&pair(x, y))
        .sub(&pair(y, x))
        .add(&pair(y, y))
}

/// (Φ(x) + Φ(y))(Φ̄(x) + Φ̄(y)).
pub fn sum_pair<C: Scalar>(x: usize, y: usize) -> Element<C> {
    pair(x, x)
        .add(&pair(x, y))
        .add(&pair(y, x))
        .add(&pair(y, y))
}

/// Φ(x)Φ̄(y) + Φ(y)Φ̄(x).
pub fn cross_pair<C: Scalar>(x: usize, y: usize) -> Element<C> {
    pair(x, y).add(&pair(y, x))
}

fn integrate<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    u: &Matrix<C>,
    f: impl Fn(usize, usize) -> Element<C>,
) -> Element<C> {
    let w2 = weight.clone() * weight.clone();
    let mut out = Element::zero();
    for &(x, y) in xhat {
        if u[x][y].is_zero() {
            continue;
        }
        out = out.add(&f(x, y).scale(&(w2.clone() * u[x][y].clone())));
    }
    out
}

/// −2∫(Φ(x)−Φ(y))(Φ̄(x)−Φ̄(y)) u(x−y).
pub fn q11<C: Scalar>(xhat: &[(usize, usize)], weight: &C, u: &Matrix<C>) -> Element<C> {
    integrate(xhat, weight, u, difference_pair).scale(&C::from_i64(-2))
}

/// −∫[:(Φ(x)−Φ(y))(Φ̄(x)−Φ̄(y))(Φ(x)+Φ(y))(Φ̄(x)+Φ̄(y)): + 3:[(ΦΦ̄)(x) − (ΦΦ̄)(y)]²:] u(x−y).
pub fn q22<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    u: &Matrix<C>,
    cov: &Matrix<C>,
) -> Element<C> {
    integrate(xhat, weight, u, |x, y| {
        let d = pair::<C>(x, x).sub(&pair(y, y));
        difference_pair::<C>(x, y)
            .mul(&sum_pair(x, y))
            .add(&d.mul(&d).scale(&C::from_i64(3)))
    })
    .wick_order(0, cov)
    .neg()
}

/// 4∫:(ΦΦ̄)(x)Φ(x)Φ̄(y)(ΦΦ̄)(y): u(x−y). The same form enters Q and Q̃.
pub fn q33<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    u: &Matrix<C>,
    cov: &Matrix<C>,
) -> Element<C> {
    integrate(xhat, weight, u, |x, y| {
        pair::<C>(x, x).mul(&pair(x, y)).mul(&pair(y, y))
    })
    .wick_order(0, cov)
    .scale(&C::from_i64(4))
}

/// 2∫[Φ(x)Φ̄(y) + Φ(y)Φ̄(x)] u(x−y).
pub fn qt11<C: Scalar>(xhat: &[(usize, usize)], weight: &C, u: &Matrix<C>) -> Element<C> {
    integrate(xhat, weight, u, cross_pair).scale(&C::from_i64(2))
}

/// ∫{:[Φ(x)Φ̄(y) + Φ(y)Φ̄(x)]²: + 4:(ΦΦ̄)(x)(ΦΦ̄)(y):} u(x−y).
pub fn qt22<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    u: &Matrix<C>,
    cov: &Matrix<C>,
) -> Element<C> {
    integrate(xhat, weight, u, |x, y| {
        let c = cross_pair::<C>(x, y);
        c.mul(&c)
            .add(&pair::<C>(x, x).mul(&pair(y, y)).scale(&C::from_i64(4)))
    })
    .wick_order(0, cov)
}

/// g²[Q^{(1,1)}(w^{(3)}) + Q^{(2,2)}(w^{(2)}) + Q^{(3,3)}(w^{(1)})], kernels indexed w[p − 1].
pub fn q_total<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    w: &[Matrix<C>; 3],
    cov: &Matrix<C>,
    g: &C,
) -> Element<C> {
    let s = q11(xhat, weight, &w[2])
        .add(&q22(xhat, weight, &w[1], cov))
        .add(&q33(xhat, weight, &w[0], cov));
    s.scale(&(g.clone() * g.clone()))
}

/// g²[Q̃^{(1,1)}(v^{(3)}) + Q̃^{(2,2)}(v^{(2)}) + Q̃^{(3,3)}(v^{(1)})].
pub fn q_tilde_total<C: Scalar>(
    xhat: &[(usize, usize)],
    weight: &C,
    v: &[Matrix<C>; 3],
    cov: &Matrix<C>,
    g: &C,
) -> Element<C> {
    let s = qt11(xhat, weight, &v[2])
        .add(&qt22(xhat, weight, &v[1], cov))
        .add(&q33(xhat, weight, &v[0], cov));
    s.scale(&(g.clone() * g.clone()))
}

/// v^{(1)} = Γ, v^{(p)} = (Γ + C)^p − C^p entrywise.
pub fn v_matrices<C: Scalar>(gamma: &Matrix<C>, c_next: &Matrix<C>) -> [Matrix<C>; 3] {
    let power = |p: u32| -> Matrix<C> {
        gamma
            .iter()
            .zip(c_next)
            .map(|(gr, cr)| {
                gr.iter()
                    .zip(cr)
                    .map(|(g, c)| {
                        let full = g.clone() + c.clone();
                        let (mut a, mut b) = (C::one(), C::one());
                        for _ in 0..p {
                            a = a * full.clone();
                            b = b * c.clone();
                        }
                        a - b
                    })
                    .collect()
            })
            .collect()
    };
    [power(1), power(2), power(3)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use susyrg_superalgebra::{ratio, Rational};

    #[test]
    fn product_domains() {
        assert_eq!(hat_x(&[vec![0, 1]]).len(), 4);
        let two = hat_x(&[vec![0], vec![1, 2]]);
        assert_eq!(two, vec![(0, 1), (0, 2), (1, 0), (2, 0)]);
        assert!(hat_x(&[vec![0], vec![1], vec![2]]).is_empty());
    }

    #[test]
    fn first_kernel_vanishes_on_the_diagonal() {
        let u: Matrix<Rational> = vec![vec![ratio(1, 1)]];
        assert!(q11(&hat_x(&[vec![0]]), &ratio(1, 1), &u).is_empty());
    }

    #[test]
    fn v_matrices_factor() {
        let g: Matrix<Rational> = vec![vec![ratio(1, 3)]];
        let c: Matrix<Rational> = vec![vec![ratio(1, 2)]];
        let v = v_matrices(&g, &c);
        // Γ(Γ + 2C) and Γ(Γ² + 3ΓC + 3C²)
        let r = |p, q| ratio::<Rational>(p, q);
        assert_eq!(v[1][0][0], r(1, 3) * r(4, 3));
        assert_eq!(v[2][0][0], r(1, 3) * (r(1, 9) + r(1, 2) + r(3, 4)));
    }
}
