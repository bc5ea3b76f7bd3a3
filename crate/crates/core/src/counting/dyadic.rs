use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{box_size, decode, IntegerHessian};
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

/// `K_k(2^{e_1}, ..., 2^{e_k}, 2^{tail})`: points with
/// `2^{e_i - 1} < |lambda_i| <= 2^{e_i}` for `i <= k` and
/// `|lambda_i| <= 2^{tail}` for `i > k`.
///
/// The classes with `tail = 0` and `e_k >= 1`, together with `K_0(1)`,
/// partition the box.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DyadicClass {
    pub exponents: Vec<i32>,
    pub tail_exponent: i32,
}

impl DyadicClass {
    pub fn new(exponents: Vec<i32>, tail_exponent: i32) -> Result<Self> {
        if exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid("exponents must be non-increasing".into()));
        }
        if tail_exponent < 0 || exponents.last().is_some_and(|&e| e < tail_exponent) {
            return Err(Error::Invalid("need E_1 >= ... >= E_{k+1} >= 1".into()));
        }
        Ok(DyadicClass {
            exponents,
            tail_exponent,
        })
    }

    /// `K_0(1)`.
    pub fn small() -> Self {
        DyadicClass {
            exponents: vec![],
            tail_exponent: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.exponents.len()
    }

    /// `E_1, ..., E_{k+1}`.
    pub fn bounds(&self) -> Vec<f64> {
        self.exponents
            .iter()
            .chain(std::iter::once(&self.tail_exponent))
            .map(|&e| 2f64.powi(e))
            .collect()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.exponents.iter().map(|&e| e as i64).sum()
    }

    /// Keep the first `k` exponents, moving `e_{k+1}` into the tail.
    pub fn truncate(&self, k: usize) -> Self {
        if k >= self.k() {
            return self.clone();
        }
        DyadicClass {
            exponents: self.exponents[..k].to_vec(),
            tail_exponent: self.exponents[k],
        }
    }

    pub fn contains(&self, spectrum: &SpectrumOracle) -> bool {
        let k = self.k();
        if k > spectrum.n() {
            return false;
        }
        self.exponents.iter().enumerate().all(|(i, &e)| {
            spectrum.count_above(e - 1) > i && spectrum.count_above(e) <= i
        }) && spectrum.count_above(self.tail_exponent) <= k
    }
}

impl fmt::Display for DyadicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .chain(std::iter::once(&self.tail_exponent))
            .map(|&e| {
                if e >= 0 && e < 63 {
                    format!("{}", 1u64 << e)
                } else {
                    format!("2^{e}")
                }
            })
            .collect();
        write!(f, "K_{}({})", self.k(), parts.join(","))
    }
}

/// Exact signature `(positive, negative, zero)` of a symmetric rational
/// matrix, by symmetric elimination.
pub fn inertia(m: &Matrix<Rational>) -> (usize, usize, usize) {
    let mut a = m.clone();
    let mut size = a.rows();
    let (mut pos, mut neg) = (0, 0);
    while size > 0 {
        let last = size - 1;
        let pivot = (0..size).find(|&i| !a[(i, i)].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => {
                let off = (0..size)
                    .flat_map(|i| (0..size).map(move |j| (i, j)))
                    .find(|&(i, j)| i != j && !a[(i, j)].is_zero());
                match off {
                    None => break,
                    Some((i, j)) => {
                        // congruence by row/col i += row/col j makes a_ii = 2 a_ij
                        for c in 0..size {
                            let v = a[(j, c)].clone();
                            a[(i, c)] = a[(i, c)].clone() + v;
                        }
                        for r in 0..size {
                            let v = a[(r, j)].clone();
                            a[(r, i)] = a[(r, i)].clone() + v;
                        }
                        i
                    }
                }
            }
        };
        swap_sym(&mut a, pivot, last, size);
        let p = a[(last, last)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in 0..last {
            let f = a[(i, last)].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..last {
                let v = f.clone() * a[(last, j)].clone();
                a[(i, j)] = a[(i, j)].clone() - v;
            }
        }
        size -= 1;
    }
    (pos, neg, m.rows() - pos - neg)
}

fn swap_sym(a: &mut Matrix<Rational>, i: usize, j: usize, size: usize) {
    if i == j {
        return;
    }
    for c in 0..size {
        let t = a[(i, c)].clone();
        a[(i, c)] = a[(j, c)].clone();
        a[(j, c)] = t;
    }
    for r in 0..size {
        let t = a[(r, i)].clone();
        a[(r, i)] = a[(r, j)].clone();
        a[(r, j)] = t;
    }
}

/// Eigenvalue magnitudes of `H = A / m` with exact answers to threshold
/// questions near powers of two.
#[derive(Debug, Clone)]
pub struct SpectrumOracle {
    n: usize,
    a: Vec<i128>,
    m: i128,
    /// `|lambda_i|`, decreasing
    abs: Vec<f64>,
    spectral_radius: f64,
}

const TIE_TOLERANCE: f64 = 1e-9;

impl SpectrumOracle {
    pub fn new(n: usize, a: Vec<i128>, m: i128) -> Self {
        let mf = m as f64;
        let h = Matrix::from_fn(n, n, |i, j| a[i * n + j] as f64 / mf);
        let abs = crate::minors::abs_eigenvalues(&h).unwrap_or_else(|_| vec![f64::NAN; n]);
        let spectral_radius = abs.first().copied().unwrap_or(0.0);
        SpectrumOracle {
            n,
            a,
            m,
            abs,
            spectral_radius,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.abs
    }

    /// Number of eigenvalues with `|lambda| > 2^e`.
    pub fn count_above(&self, e: i32) -> usize {
        let t = 2f64.powi(e);
        let tol = TIE_TOLERANCE * t.max(self.spectral_radius);
        if self.abs.iter().any(|&l| (l - t).abs() <= tol || l.is_nan()) {
            self.count_above_exact(e)
        } else {
            self.abs.iter().filter(|&&l| l > t).count()
        }
    }

    /// `#{lambda > t} + #{lambda < -t}` from the inertia of `H -+ t I`.
    pub fn count_above_exact(&self, e: i32) -> usize {
        let n = self.n;
        // work with 2^s A and 2^s t m, both integers
        let s = (-e).max(0) as u32;
        let scale = BigInt::from(1) << s;
        let shift = BigInt::from(self.m) * (BigInt::from(1) << (e + s as i32) as u32);
        let base = |sign: i32| {
            Matrix::from_fn(n, n, |i, j| {
                let mut v = BigInt::from(self.a[i * n + j]) * &scale;
                if i == j {
                    if sign > 0 {
                        v -= &shift;
                    } else {
                        v += &shift;
                    }
                }
                Rational::from_integer(v)
            })
        };
        let (pos, _, _) = inertia(&base(1));
        let (_, neg, _) = inertia(&base(-1));
        pos + neg
    }

    /// The unique canonical class containing this spectrum.
    pub fn classify(&self) -> DyadicClass {
        let k = self.count_above(0);
        let mut exponents = Vec::with_capacity(k);
        for i in 1..=k {
            let guess = self.abs[i - 1].log2().ceil();
            let mut e = if guess.is_finite() { (guess as i32).max(1) } else { 1 };
            while self.count_above(e) >= i {
                e += 1;
            }
            while e > 1 && self.count_above(e - 1) < i {
                e -= 1;
            }
            exponents.push(e);
        }
        DyadicClass {
            exponents,
            tail_exponent: 0,
        }
    }
}

pub fn classify_dyadic<S: Scalar>(c: &CubicForm<S>, x: &[i64], b: i64) -> Result<DyadicClass> {
    if x.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| v.abs() > b) {
        return Err(Error::PointOutsideBox(b));
    }
    let ih = IntegerHessian::new(c)?;
    Ok(SpectrumOracle::new(ih.n(), ih.matrix(x), ih.scale()).classify())
}

/// Number of box points in each canonical class.
pub fn class_histogram<S: Scalar>(c: &CubicForm<S>, b: i64) -> Result<BTreeMap<DyadicClass, u64>> {
    let ih = IntegerHessian::new(c)?;
    let n = ih.n();
    let total = box_size(n, b)?;
    Ok((0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            let class = SpectrumOracle::new(n, ih.matrix(&x), ih.scale()).classify();
            *acc.entry(class).or_insert(0u64) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge_counts))
}

pub(crate) fn merge_counts<K: Ord>(mut a: BTreeMap<K, u64>, b: BTreeMap<K, u64>) -> BTreeMap<K, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::scalar::int;

    #[test]
    fn classify_examples() {
        let f = fermat::<Rational>(2);
        assert_eq!(classify_dyadic(&f, &[0, 0], 2).unwrap(), DyadicClass::small());
        let c = classify_dyadic(&f, &[1, 0], 2).unwrap();
        assert_eq!(c.exponents, vec![3]);
        assert_eq!(c.to_string(), "K_1(8,1)");
        assert_eq!(classify_dyadic(&f, &[1, 1], 2).unwrap().exponents, vec![3, 3]);
        assert_eq!(classify_dyadic(&f, &[3, 0], 2).unwrap_err(), Error::PointOutsideBox(2));
    }

    #[test]
    fn exact_ties_go_to_the_lower_class() {
        // H = 8 exactly: 4 < 8 <= 8 gives e = 3, not 4
        let o = SpectrumOracle::new(1, vec![8], 1);
        assert_eq!(o.classify().exponents, vec![3]);
        assert_eq!(o.count_above_exact(3), 0);
        assert_eq!(o.count_above_exact(2), 1);
        // |lambda| = 1 is still K_0(1)
        let o = SpectrumOracle::new(2, vec![0, 1, 1, 0], 1);
        assert_eq!(o.classify(), DyadicClass::small());
        // 1/2 threshold
        let o = SpectrumOracle::new(1, vec![1], 2);
        assert_eq!(o.count_above_exact(-1), 0);
        assert_eq!(o.count_above_exact(-2), 1);
    }

    #[test]
    fn inertia_examples() {
        let m = |rows: Vec<Vec<i64>>| {
            Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect()).unwrap()
        };
        assert_eq!(inertia(&m(vec![vec![0, 1], vec![1, 0]])), (1, 1, 0));
        assert_eq!(inertia(&m(vec![vec![2, 0, 0], vec![0, -3, 0], vec![0, 0, 0]])), (1, 1, 1));
        assert_eq!(inertia(&m(vec![vec![1, 2], vec![2, 4]])), (1, 0, 1));
        assert_eq!(inertia(&m(vec![vec![0, 0], vec![0, 0]])), (0, 0, 2));
    }

    #[test]
    fn truncation_moves_exponent_to_tail() {
        let c = DyadicClass::new(vec![5, 3, 2], 0).unwrap();
        let t = c.truncate(1);
        assert_eq!(t.exponents, vec![5]);
        assert_eq!(t.tail_exponent, 3);
        assert!(DyadicClass::new(vec![1, 2], 0).is_err());
    }

    #[test]
    fn histogram_covers_the_box() {
        let f = fermat::<Rational>(2);
        let h = class_histogram(&f, 3).unwrap();
        assert_eq!(h.values().sum::<u64>(), 49);
        assert_eq!(h[&DyadicClass::small()], 1);
    }
}
