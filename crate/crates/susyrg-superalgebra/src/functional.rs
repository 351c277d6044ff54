use crate::element::{Element, Kind, Var};
use crate::scalar::Scalar;
use crate::AlgebraError;

fn tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|t| (0..n).map(move |i| [t.clone(), vec![i]].concat()))
            .collect();
    }
    out
}

/// D^{2p,m}e(f_1, …, f_m; g) at zero field, species 0.
///
/// The directions alternate between φ and φ̄: f_1 varies φ, f_2 varies φ̄,
/// and so on. The fermionic part is
/// Π_{j=0}^{p−1} ∂_{ψ̄(y_{p−j})}∂_{ψ(x_{p−j})} summed against g(x, y) over
/// all sites. Functional derivatives and the lattice measure δ³ cancel, so
/// sums are plain site sums.
pub fn fermionic_derivative_functional<C: Scalar>(
    e: &Element<C>,
    n_sites: usize,
    p: usize,
    directions: &[Vec<C>],
    g: impl Fn(&[usize], &[usize]) -> C,
) -> Result<C, AlgebraError> {
    if let Some(s) = e.max_site() {
        if s >= n_sites {
            return Err(AlgebraError::SiteOutOfRange {
                site: s,
                len: n_sites,
            });
        }
    }
    for f in directions {
        if f.len() != n_sites {
            return Err(AlgebraError::DimensionMismatch {
                expected: n_sites,
                got: f.len(),
            });
        }
    }
    let m = directions.len() as u32;
    let mut b = e.at_zero(1).map_terms(|mo, c| {
        (mo.fermion_mask().count_ones() == 2 * p as u32 && mo.total_degree() == m + 2 * p as u32)
            .then(|| c.clone())
    });
    for (i, f) in directions.iter().enumerate() {
        let kind = if i % 2 == 0 { Kind::Phi } else { Kind::PhiBar };
        let mut next = Element::zero();
        for (x, fx) in f.iter().enumerate() {
            if !fx.is_zero() {
                next = next.add(&b.derivative(Var::new(kind, 0, x)).scale(fx));
            }
        }
        b = next;
    }
    if b.is_empty() {
        return Ok(C::zero());
    }
    let mut total = C::zero();
    let points = tuples(n_sites, p);
    for xs in &points {
        for ys in &points {
            let mut d = b.clone();
            for j in 0..p {
                d = d.derivative(Var::psi(xs[j])).derivative(Var::psibar(ys[j]));
                if d.is_empty() {
                    break;
                }
            }
            let v = d.constant_term();
            if !v.is_zero() {
                total = total + g(xs, ys) * v;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{phi_phibar, super_pair};
    use crate::scalar::{ratio, Rational};

    type E = Element<Rational>;

    fn integral(n: usize, delta3: Rational, f: impl Fn(usize) -> E) -> E {
        (0..n)
            .fold(E::zero(), |acc, x| acc.add(&f(x)))
            .scale(&delta3)
    }

    #[test]
    fn quadratic_gives_volume() {
        let d3 = ratio::<Rational>(1, 8);
        let bos = integral(3, d3.clone(), |x| {
            E::var(Var::phi(x)).mul(&E::var(Var::phibar(x)))
        });
        let one = vec![ratio(1, 1); 3];
        let v =
            fermionic_derivative_functional(&bos, 3, 0, &[one.clone(), one], |_, _| ratio(1, 1))
                .unwrap();
        assert_eq!(v, ratio(3, 8));
        let fer = integral(3, d3, |x| E::var(Var::psi(x)).mul(&E::var(Var::psibar(x))));
        let w = fermionic_derivative_functional(&fer, 3, 1, &[], |_, _| ratio(1, 1)).unwrap();
        assert_eq!(w, ratio(3, 8));
    }

    #[test]
    fn susy_quadratics_satisfy_the_first_identity() {
        let j = super_pair::<Rational>(0, 0, 1)
            .scale(&ratio(2, 3))
            .add(&phi_phibar(1).scale(&ratio(-1, 4)));
        let one = vec![ratio(1, 1); 2];
        let f = fermionic_derivative_functional(&j, 2, 1, &[], |_, _| ratio(1, 1)).unwrap();
        let b = fermionic_derivative_functional(&j, 2, 0, &[one.clone(), one], |_, _| ratio(1, 1))
            .unwrap();
        assert_eq!(f, b);
    }

    #[test]
    fn direction_length_is_checked() {
        let e: E = phi_phibar(0);
        let r = fermionic_derivative_functional(&e, 2, 0, &[vec![ratio(1, 1)]], |_, _| ratio(1, 1));
        assert!(matches!(
            r,
            Err(AlgebraError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }
}
