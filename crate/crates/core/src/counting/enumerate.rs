//! Exact lattice enumeration for systems `|y_i| <= B`, `|(Ay)_i| < T` (or
//! `<= T`) with integer `A` and `T`.
//!
//! All but one coordinate are enumerated inside an ellipsoid that contains
//! every solution; the last coordinate is then an exact integer interval
//! cut out by the linear constraints, so floating point only ever widens the
//! search and never decides membership.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::{CubicForm, SymMatrix};
use crate::scalar::{common_denominator, Rational, Scalar};

/// Integer slab system in `n` unknowns.
#[derive(Debug, Clone)]
pub struct SlabSystem {
    n: usize,
    /// row-major `n x n`
    a: Vec<i128>,
    t: i128,
    strict: bool,
    b: i64,
}

/// Guard so that every partial sum `sum a_ij y_j` fits comfortably in i128.
const SUM_LIMIT: f64 = 1e36;

const PRUNE_SLACK: f64 = 1e-9;

impl SlabSystem {
    pub fn new(n: usize, a: Vec<i128>, t: i128, strict: bool, b: i64) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        if b < 0 || t < 0 {
            return Err(Error::OutOfRange("negative radius".into()));
        }
        let amax = a.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as f64;
        if amax * (b as f64) * (n as f64) + t as f64 > SUM_LIMIT {
            return Err(Error::Overflow("slab system entries too large".into()));
        }
        Ok(SlabSystem { n, a, t, strict, b })
    }

    fn within(&self, v: i128) -> bool {
        if self.strict {
            v.abs() < self.t
        } else {
            v.abs() <= self.t
        }
    }

    pub fn satisfies(&self, y: &[i64]) -> bool {
        (0..self.n).all(|r| {
            let s: i128 = (0..self.n).map(|j| self.a[r * self.n + j] * y[j] as i128).sum();
            self.within(s)
        })
    }

    /// Exhaustive count over the whole box.
    pub fn count_brute(&self) -> u64 {
        let side = (2 * self.b + 1) as u64;
        let total = side.pow(self.n as u32);
        let mut y = vec![0i64; self.n];
        let mut count = 0;
        for idx in 0..total {
            decode(idx, self.b, &mut y);
            if self.satisfies(&y) {
                count += 1;
            }
        }
        count
    }

    /// Pruned exact count.
    pub fn count(&self) -> u64 {
        let n = self.n;
        let mut s = vec![0i128; n];
        let mut y = vec![0i64; n];
        if n == 1 {
            return self.leaf(&s).map_or(0, |(lo, hi)| (hi - lo + 1) as u64);
        }
        match self.pruning_factor() {
            Some(r) => self.descend(n - 1, &r, &mut y, &mut s, 1.0 + PRUNE_SLACK),
            None => self.descend_box(n - 1, &mut y, &mut s),
        }
    }

    /// Upper-triangular `R` with `R^T R = A^T A / (2n T^2) + I / (2n B^2)`;
    /// every solution has `y^T R^T R y <= 1`.
    fn pruning_factor(&self) -> Option<Vec<f64>> {
        let n = self.n;
        if self.t == 0 || self.b == 0 {
            return None;
        }
        let t2 = (self.t as f64).powi(2);
        let b2 = (self.b as f64).powi(2);
        let scale = 2.0 * n as f64;
        let g = DMatrix::from_fn(n, n, |i, j| {
            let ata: f64 = (0..n)
                .map(|r| self.a[r * n + i] as f64 * self.a[r * n + j] as f64)
                .sum();
            ata / (scale * t2) + if i == j { 1.0 / (scale * b2) } else { 0.0 }
        });
        let chol = g.cholesky()?;
        let l = chol.l();
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                r[i * n + j] = l[(j, i)];
            }
        }
        Some(r)
    }

    fn descend(&self, level: usize, r: &[f64], y: &mut [i64], s: &mut [i128], budget: f64) -> u64 {
        if level == 0 {
            return self.leaf(s).map_or(0, |(lo, hi)| (hi - lo + 1) as u64);
        }
        let n = self.n;
        let rll = r[level * n + level];
        let shift: f64 = (level + 1..n).map(|j| r[level * n + j] * y[j] as f64).sum::<f64>() / rll;
        let centre = -shift;
        let half = budget.max(0.0).sqrt() / rll;
        let half = half * (1.0 + PRUNE_SLACK) + PRUNE_SLACK;
        let lo = ((centre - half).ceil() as i64).max(-self.b);
        let hi = ((centre + half).floor() as i64).min(self.b);
        let mut total = 0;
        for v in lo..=hi {
            y[level] = v;
            for row in 0..n {
                s[row] += self.a[row * n + level] * v as i128;
            }
            let d = rll * (v as f64 - centre);
            total += self.descend(level - 1, r, y, s, budget - d * d);
            for row in 0..n {
                s[row] -= self.a[row * n + level] * v as i128;
            }
        }
        y[level] = 0;
        total
    }

    fn descend_box(&self, level: usize, y: &mut [i64], s: &mut [i128]) -> u64 {
        if level == 0 {
            return self.leaf(s).map_or(0, |(lo, hi)| (hi - lo + 1) as u64);
        }
        let n = self.n;
        let mut total = 0;
        for v in -self.b..=self.b {
            y[level] = v;
            for row in 0..n {
                s[row] += self.a[row * n + level] * v as i128;
            }
            total += self.descend_box(level - 1, y, s);
            for row in 0..n {
                s[row] -= self.a[row * n + level] * v as i128;
            }
        }
        y[level] = 0;
        total
    }

    /// Exact range of `y_0` given the contribution `s` of the other
    /// coordinates to each row.
    fn leaf(&self, s: &[i128]) -> Option<(i64, i64)> {
        let n = self.n;
        let t = self.t;
        let mut lo = -(self.b as i128);
        let mut hi = self.b as i128;
        for row in 0..n {
            let (a, s) = match self.a[row * n] {
                a if a < 0 => (-a, -s[row]),
                a => (a, s[row]),
            };
            if a == 0 {
                if !self.within(s) {
                    return None;
                }
                continue;
            }
            let (l, h) = if self.strict {
                (Integer::div_floor(&(-t - s), &a) + 1, Integer::div_ceil(&(t - s), &a) - 1)
            } else {
                (Integer::div_ceil(&(-t - s), &a), Integer::div_floor(&(t - s), &a))
            };
            lo = lo.max(l);
            hi = hi.min(h);
            if lo > hi {
                return None;
            }
        }
        Some((lo as i64, hi as i64))
    }
}

/// Write the `idx`-th point of the box `[-b, b]^n` (lexicographic) into `x`.
pub fn decode(mut idx: u64, b: i64, x: &mut [i64]) {
    let side = (2 * b + 1) as u64;
    for xi in x.iter_mut().rev() {
        *xi = (idx % side) as i64 - b;
        idx /= side;
    }
}

pub fn box_size(n: usize, b: i64) -> Result<u64> {
    ((2 * b + 1) as u64)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Overflow(format!("box of radius {b} in {n} variables")))
}

/// Whether `x` is the representative of `{x, -x}` (first non-zero entry
/// positive) or zero.
pub fn is_half_representative(x: &[i64]) -> bool {
    x.iter().find(|&&v| v != 0).map_or(true, |&v| v > 0)
}

fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128()
        .ok_or_else(|| Error::Overflow("coefficient does not fit in 128 bits".into()))
}

/// Exact integer data of a normalised Hessian: `H_c(x) = 6 D(x) / m` with
/// `D` the integer-scaled third-derivative tensor and `m = max |D|`.
#[derive(Debug, Clone)]
pub struct IntegerHessian {
    n: usize,
    d: Vec<i128>,
    m: i128,
}

impl IntegerHessian {
    pub fn new<S: Scalar>(c: &CubicForm<S>) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::ZeroForm);
        }
        let n = c.n();
        let mut exact = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    exact.push(c.third_derivative(i, j, k).to_exact().ok_or(Error::NonFinite)?);
                }
            }
        }
        let den = common_denominator(exact.iter());
        let d = exact
            .iter()
            .map(|v| to_i128(&(v * Rational::from_integer(den.clone())).to_integer()))
            .collect::<Result<Vec<_>>>()?;
        let m = d.iter().map(|v| v.abs()).max().unwrap_or(0);
        Ok(IntegerHessian { n, d, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> i128 {
        self.m
    }

    /// `6 D(x)`, row-major; equals `m H_c(x)`.
    pub fn matrix(&self, x: &[i64]) -> Vec<i128> {
        let n = self.n;
        let mut out = vec![0i128; n * n];
        for i in 0..n {
            for j in i..n {
                let v: i128 = (0..n).map(|k| self.d[(i * n + j) * n + k] * x[k] as i128).sum();
                out[i * n + j] = 6 * v;
                out[j * n + i] = 6 * v;
            }
        }
        out
    }

    /// Slab system for `N_{H_c(x)}(B)`.
    pub fn system(&self, x: &[i64], b: i64, strict: bool) -> Result<SlabSystem> {
        SlabSystem::new(self.n, self.matrix(x), b as i128 * self.m, strict, b)
    }

    /// Slab system for `H_c(x) y = 0`.
    pub fn kernel_system(&self, x: &[i64], b: i64) -> Result<SlabSystem> {
        SlabSystem::new(self.n, self.matrix(x), 1, true, b)
    }

    /// `H_c(x)` in floating point.
    pub fn hessian_f64(&self, x: &[i64]) -> Vec<f64> {
        let m = self.m as f64;
        self.matrix(x).iter().map(|&v| v as f64 / m).collect()
    }
}

/// Slab system `|y| <= B`, `|Hy| <= B` (or `<`) for an arbitrary symmetric
/// matrix, scaled to integers exactly.
pub fn matrix_system<S: Scalar>(h: &SymMatrix<S>, b: i64, strict: bool) -> Result<SlabSystem> {
    let exact = h
        .matrix()
        .data()
        .iter()
        .map(|v| v.to_exact().ok_or(Error::NonFinite))
        .collect::<Result<Vec<_>>>()?;
    let den = common_denominator(exact.iter());
    let a = exact
        .iter()
        .map(|v| to_i128(&(v * Rational::from_integer(den.clone())).to_integer()))
        .collect::<Result<Vec<_>>>()?;
    let t = to_i128(&(BigInt::from(b) * &den))?;
    if den.is_zero() || den.is_negative() {
        return Err(Error::Invalid("degenerate denominator".into()));
    }
    SlabSystem::new(h.n(), a, t, strict, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::matrix::Matrix;

    fn sys(n: usize, a: Vec<i128>, t: i128, strict: bool, b: i64) -> SlabSystem {
        SlabSystem::new(n, a, t, strict, b).unwrap()
    }

    #[test]
    fn decode_walks_the_box() {
        let mut x = [0i64; 2];
        decode(0, 1, &mut x);
        assert_eq!(x, [-1, -1]);
        decode(5, 1, &mut x);
        assert_eq!(x, [0, 1]);
        decode(8, 1, &mut x);
        assert_eq!(x, [1, 1]);
    }

    #[test]
    fn pruned_matches_brute_force_on_small_systems() {
        let cases = [
            sys(2, vec![6, 0, 0, 6], 1, false, 1),
            sys(2, vec![1, 0, 0, 0], 3, false, 3),
            sys(2, vec![0; 4], 2, false, 2),
            sys(3, vec![2, -1, 0, -1, 2, -1, 0, -1, 2], 5, true, 4),
            sys(3, vec![7, 3, 1, 3, -5, 2, 1, 2, 0], 9, false, 6),
            sys(1, vec![6], 2, true, 2),
        ];
        for s in &cases {
            assert_eq!(s.count(), s.count_brute(), "{s:?}");
        }
    }

    #[test]
    fn leaf_interval_strictness() {
        // |3 y| < 6 with |y| <= 5: y in {-1, 0, 1}; weak adds -2, 2
        assert_eq!(sys(1, vec![3], 6, true, 5).count(), 3);
        assert_eq!(sys(1, vec![3], 6, false, 5).count(), 5);
        assert_eq!(sys(1, vec![-3], 6, false, 5).count(), 5);
    }

    #[test]
    fn integer_hessian_of_fermat() {
        let f = fermat::<Rational>(3);
        let ih = IntegerHessian::new(&f).unwrap();
        let h = ih.hessian_f64(&[1, 2, 3]);
        assert_eq!(h, vec![6.0, 0.0, 0.0, 0.0, 12.0, 0.0, 0.0, 0.0, 18.0]);
        assert_eq!(IntegerHessian::new(&CubicForm::<Rational>::zero(2).unwrap()).unwrap_err(), Error::ZeroForm);
    }

    #[test]
    fn rational_matrix_system_scales_exactly() {
        let h = SymMatrix::new(Matrix::from_diagonal(&[crate::scalar::rat(1, 2), crate::scalar::rat(1, 3)])).unwrap();
        // |y1/2| <= 2, |y2/3| <= 2 inside |y| <= 2: whole box
        assert_eq!(matrix_system(&h, 2, false).unwrap().count(), 25);
    }

    #[test]
    fn half_representatives() {
        assert!(is_half_representative(&[0, 0]));
        assert!(is_half_representative(&[0, 2, -1]));
        assert!(!is_half_representative(&[0, -2, 1]));
    }
}
