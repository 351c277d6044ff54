use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Coefficient field of a super element.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// Exact zero for rationals; |x| ≤ 1e-12·scale for floats.
    fn negligible(&self, scale: f64) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale.max(1.0)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    /// Exact binary value of a finite float.
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
}

/// p/q as a scalar.
pub fn ratio<C: Scalar>(p: i64, q: i64) -> C {
    C::from_i64(p) / C::from_i64(q)
}

/// Determinant by elimination; pivots on the largest magnitude.
pub fn determinant<C: Scalar>(m: &[Vec<C>]) -> C {
    let n = m.len();
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut det = C::one();
    for col in 0..n {
        let pivot = (col..n).filter(|&r| !a[r][col].is_zero()).max_by(|&r, &s| {
            a[r][col]
                .to_f64()
                .abs()
                .partial_cmp(&a[s][col].to_f64().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let Some(p) = pivot else { return C::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let d = a[col][col].clone();
        det = det * d.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / d.clone();
            for c in col..n {
                let v = a[r][c].clone() - f.clone() * a[col][c].clone();
                a[r][c] = v;
            }
        }
    }
    det
}

/// Permanent by Ryser's formula.
pub fn permanent<C: Scalar>(m: &[Vec<C>]) -> C {
    let n = m.len();
    if n == 0 {
        return C::one();
    }
    let mut total = C::zero();
    for s in 1u32..(1 << n) {
        let mut prod = C::one();
        for row in m {
            let mut sum = C::zero();
            for (j, v) in row.iter().enumerate() {
                if s & (1 << j) != 0 {
                    sum = sum + v.clone();
                }
            }
            prod = prod * sum;
        }
        if (n as u32 - s.count_ones()) % 2 == 1 {
            total = total - prod;
        } else {
            total = total + prod;
        }
    }
    total
}
