//! Polynomial identities that move the F_Q kernels onto the local monomials.

use num_complex::Complex64;
use serde::Serialize;
use susyrg_superalgebra::{super_pair, Element, Scalar};

use crate::evaluate::evaluate_complex;
use crate::kernels::{cross_pair, difference_pair, sum_pair};

/// Both sides of the two identities on the points x = 0, y = 1, with a = (ΦΦ̄)(x),
/// b = (ΦΦ̄)(y) and s = Φ(x)Φ̄(y) + Φ(y)Φ̄(x):
/// s = a + b − (a + b − s) and
/// s² + 4ab = 4a² + 4b² − (a + b − s)(a + b + s) − 3(a − b)².
pub fn localization_identities<C: Scalar>() -> [(Element<C>, Element<C>); 2] {
    let a = super_pair::<C>(0, 0, 0);
    let b = super_pair::<C>(0, 1, 1);
    let s = cross_pair::<C>(0, 1);
    let d = difference_pair::<C>(0, 1);
    let first = (s.clone(), a.add(&b).sub(&d));
    let four = C::from_i64(4);
    let amb = a.sub(&b);
    let rhs = a
        .mul(&a)
        .scale(&four)
        .add(&b.mul(&b).scale(&four))
        .sub(&d.mul(&sum_pair(0, 1)))
        .sub(&amb.mul(&amb).scale(&C::from_i64(3)));
    let second = (s.mul(&s).add(&a.mul(&b).scale(&four)), rhs);
    [first, second]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub samples: usize,
    /// max |lhs − rhs| / (1 + |lhs|) over samples and both identities.
    pub max_residual: f64,
}

/// Evaluates both identities at complex fields (φ(x), φ(y)) with φ̄ = conj(φ).
pub fn localization_check(samples: &[(Complex64, Complex64)]) -> LocalizationReport {
    let ids = localization_identities::<f64>();
    let mut max_residual: f64 = 0.0;
    for &(x, y) in samples {
        for (l, r) in &ids {
            let lv = evaluate_complex(l, &[x, y]);
            let rv = evaluate_complex(r, &[x, y]);
            max_residual = max_residual.max((lv - rv).norm() / (1.0 + lv.norm()));
        }
    }
    LocalizationReport {
        samples: samples.len(),
        max_residual,
    }
}
