use num_complex::Complex64;

use crate::derivative::Direction;
use crate::error::CoreError;
use crate::field::Field3;
use crate::Site;

pub const SOBOLEV_DIRECTIONS: [i8; 6] = [1, -1, 2, -2, 3, -3];

/// Highest derivative order in the norm.
const MAX_ORDER: usize = 5;

/// Σ_{j=1..5} 2^{-j} Σ_{μ_1..μ_j ∈ S} ∫_X |∂_{μ_1}…∂_{μ_j} φ|².
///
/// Lattice derivatives commute, so each multiset of directions is evaluated
/// once and weighted by its number of orderings.
pub fn sobolev_norm_sq(phi: &Field3<Complex64>, sites: &[Site]) -> Result<f64, CoreError> {
    let dirs = Direction::all();
    let mut total = 0.0;
    let mut counts = [0usize; 6];
    for j in 1..=MAX_ORDER {
        let mut sum = 0.0;
        multisets(j, 0, &mut counts, &mut |c| -> Result<(), CoreError> {
            let mut seq = Vec::with_capacity(j);
            let mut mult = factorial(j);
            for (k, &ck) in c.iter().enumerate() {
                mult /= factorial(ck);
                seq.extend(std::iter::repeat_n(dirs[k], ck));
            }
            for &x in sites {
                sum += mult as f64 * derivative_chain(phi, x, &seq)?.norm_sqr();
            }
            Ok(())
        })?;
        total += phi.scale.integrate(sum) / (1u64 << j) as f64;
    }
    Ok(total)
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

fn multisets<F>(
    remaining: usize,
    start: usize,
    counts: &mut [usize; 6],
    f: &mut F,
) -> Result<(), CoreError>
where
    F: FnMut(&[usize; 6]) -> Result<(), CoreError>,
{
    if remaining == 0 {
        return f(counts);
    }
    for k in start..6 {
        counts[k] += 1;
        multisets(remaining - 1, k, counts, f)?;
        counts[k] -= 1;
    }
    Ok(())
}

fn derivative_chain(
    phi: &Field3<Complex64>,
    x: Site,
    dirs: &[Direction],
) -> Result<Complex64, CoreError> {
    match dirs.split_first() {
        None => phi.get(x),
        Some((d, rest)) => {
            let inv = phi.scale.inv_spacing() as f64;
            Ok((derivative_chain(phi, d.shift(x), rest)? - derivative_chain(phi, x, rest)?) * inv)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridMode;
    use crate::scale::ScaleIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn boxed(scale: ScaleIndex, half: i64, f: impl Fn(Site) -> Complex64) -> Field3<Complex64> {
        let n = (2 * half + 1) as usize;
        Field3::from_fn(scale, [-half; 3], [n; 3], GridMode::OpenBox, f)
    }

    #[test]
    fn constant_field_has_zero_norm() {
        let phi = boxed(ScaleIndex::new(3, 0), 5, |_| Complex64::new(2.0, -1.0));
        assert_eq!(sobolev_norm_sq(&phi, &[[0, 0, 0]]).unwrap(), 0.0);
    }

    #[test]
    fn linear_field_matches_direct_stencil_sum() {
        // φ = x₁ on one unit block of the unit lattice: only ∂_{±1} survive at
        // first order and every higher difference vanishes.
        let phi = boxed(ScaleIndex::new(3, 0), 5, |x| {
            Complex64::new(x[0] as f64, 0.0)
        });
        let got = sobolev_norm_sq(&phi, &[[0, 0, 0]]).unwrap();
        let mut oracle = 0.0;
        for d in Direction::all() {
            let v = phi.get(d.shift([0, 0, 0])).unwrap() - phi.get([0, 0, 0]).unwrap();
            oracle += 0.5 * v.norm_sqr();
        }
        assert_eq!(oracle, 1.0);
        assert!((got - oracle).abs() < 1e-14);
    }

    #[test]
    fn missing_collar_is_reported() {
        let phi = boxed(ScaleIndex::new(3, 0), 3, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            sobolev_norm_sq(&phi, &[[0, 0, 0]]),
            Err(CoreError::Boundary(_))
        ));
        let mut phi = boxed(ScaleIndex::new(3, 0), 5, |_| Complex64::new(1.0, 0.0));
        phi.remove([4, 0, 0]);
        assert!(matches!(
            sobolev_norm_sq(&phi, &[[0, 0, 0]]),
            Err(CoreError::MissingCollar(_))
        ));
    }

    #[test]
    fn rescaled_field_norm_contracts() {
        // S_L φ(x) = L^{-d_s} φ(x/L): on integer sites the values are the same,
        // the scale-n spacing is L times the scale-(n+1) spacing.
        let l = 3u32;
        let eps = 0.3;
        let d_s = (3.0 - eps) / 4.0;
        let alpha = (3.0 + eps) / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let vals: Vec<Complex64> = (0..15usize.pow(3))
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let coarse = ScaleIndex::new(l, 1);
            let fine = ScaleIndex::new(l, 2);
            let field_at = |scale: ScaleIndex, factor: f64| {
                let mut f = boxed(scale, 7, |_| Complex64::new(0.0, 0.0));
                let sites: Vec<Site> = f.sites().collect();
                for (i, x) in sites.into_iter().enumerate() {
                    f.set(x, vals[i] * factor).unwrap();
                }
                f
            };
            let s_l_phi = field_at(coarse, (l as f64).powf(-d_s));
            let phi = field_at(fine, 1.0);
            let block: Vec<Site> = coarse
                .block_range(0)
                .flat_map(|a| {
                    coarse
                        .block_range(0)
                        .flat_map(move |b| coarse.block_range(0).map(move |c| [a, b, c]))
                })
                .collect();
            let lhs = sobolev_norm_sq(&s_l_phi, &block).unwrap();
            let rhs = sobolev_norm_sq(&phi, &block).unwrap();
            assert!(lhs <= (l as f64).powf(-(2.0 - alpha)) * rhs * (1.0 + 1e-12));
        }
    }
}
