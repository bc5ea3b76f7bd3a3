//! Numeric backends.
//!
//! Exact work runs over arbitrary-precision rationals, spectral work over
//! `f64`. Both satisfy [`Scalar`], so forms, Hessians and minors are written
//! once and instantiated for either backend.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

/// A field element usable as a coefficient of a cubic form.
pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;
    fn as_f64(&self) -> f64;
    /// Exact rational value; `None` for non-finite floats.
    fn to_exact(&self) -> Option<Rational>;

    /// Larger of the absolute values of `self` and `other`.
    fn max_abs(self, other: &Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        if b > a {
            b
        } else {
            a
        }
    }

    /// Whether the value should be treated as zero. Exact for rationals.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn as_f64(&self) -> f64 {
        // numerator / denominator can both overflow f64 even when the ratio
        // does not; scale by bit length first.
        let num = self.numer();
        let den = self.denom();
        match (num.to_f64(), den.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                let shift = num.bits().max(den.bits()) as i64 - 900;
                let shift = shift.max(0) as usize;
                let a = (num >> shift).to_f64().unwrap_or(0.0);
                let b = (den >> shift).to_f64().unwrap_or(1.0);
                a / b
            }
        }
    }

    fn to_exact(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> Option<Rational> {
        BigRational::from_float(*self)
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_i64(v)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Round `v` to the nearest rational with denominator at most `max_den`
/// (continued-fraction best approximation).
pub fn approximate_rational(v: f64, max_den: i64) -> Rational {
    if !v.is_finite() {
        return Rational::zero();
    }
    let sign = if v < 0.0 { -1 } else { 1 };
    let mut x = v.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e15 {
            break;
        }
        let a_i = a as i128;
        let p2 = a_i * p1 + p0;
        let q2 = a_i * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    BigRational::new(BigInt::from(sign * p1), BigInt::from(q1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let big = BigInt::from(10).pow(400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((r.as_f64() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_recovers_small_fractions() {
        assert_eq!(approximate_rational(0.5, 1000), rat(1, 2));
        assert_eq!(approximate_rational(-2.0 / 3.0, 1000), rat(-2, 3));
        assert_eq!(approximate_rational(1e-17, 1000), int(0));
        assert_eq!(approximate_rational(0.7071067811865476, 10), rat(5, 7));
    }

    #[test]
    fn common_denominator_is_lcm() {
        let vals = [rat(1, 4), rat(1, 6), int(3)];
        assert_eq!(common_denominator(vals.iter()), BigInt::from(12));
    }
}
