//! Small dense matrices over an arbitrary commutative ring.
//!
//! Sizes in this crate are tiny (n <= 6, compound matrices of a few hundred
//! entries), so the representation is a plain row-major `Vec`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Everything a division-free determinant needs.
pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Ring> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<T: Ring>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(S::zero(), |acc, l| {
                acc + self[(i, l)].clone() * other[(l, j)].clone()
            })
        }))
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    /// Determinant of the submatrix on `rows` x `cols` (in that order).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> S {
        debug_assert_eq!(rows.len(), cols.len());
        det_of(rows.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Division-free determinant. Panics on non-square input.
    pub fn det(&self) -> S {
        assert!(self.is_square(), "determinant of a non-square matrix");
        det_of(self.rows, |i, j| self[(i, j)].clone())
    }
}

/// Determinant by dynamic programming over column subsets: O(2^k k) ring
/// operations and no division, so it is exact over any ring.
pub fn det_of<S: Ring>(k: usize, entry: impl Fn(usize, usize) -> S) -> S {
    if k == 0 {
        return S::one();
    }
    assert!(k <= 20, "determinant size {k} too large for subset expansion");
    let full = 1usize << k;
    let mut dp: Vec<Option<S>> = vec![None; full];
    dp[0] = Some(S::one());
    for mask in 0..full {
        let Some(acc) = dp[mask].take() else { continue };
        if acc.is_zero() {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == k {
            dp[mask] = Some(acc);
            continue;
        }
        for c in 0..k {
            if mask & (1 << c) != 0 {
                continue;
            }
            let a = entry(row, c);
            if a.is_zero() {
                continue;
            }
            // columns already used that lie to the right of c are inversions
            let inversions = (mask >> (c + 1)).count_ones();
            let term = acc.clone() * a;
            let term = if inversions % 2 == 1 { -term } else { term };
            let next = mask | (1 << c);
            dp[next] = Some(match dp[next].take() {
                Some(v) => v + term,
                None => term,
            });
        }
    }
    dp[full - 1].take().unwrap_or_else(S::zero)
}

impl<S: Scalar> Matrix<S> {
    /// Largest absolute entry.
    pub fn sup_norm(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, v| acc.max_abs(v))
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::as_f64)
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].as_f64())
    }
}

impl Matrix<f64> {
    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Exact rank and a basis of the null space over a field, by Gaussian
/// elimination. Returns (rank, kernel basis vectors).
pub fn rank_and_kernel<S: Scalar>(m: &Matrix<S>) -> (usize, Vec<Vec<S>>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // largest pivot keeps the float path stable; any nonzero works exactly
        let mut best = None;
        for i in r..rows {
            if a[(i, c)].is_negligible() {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if a[(i, c)].abs() > a[(b, c)].abs() => best = Some(i),
                _ => {}
            }
        }
        let Some(p) = best else { continue };
        if p != r {
            for j in 0..cols {
                let tmp = a[(r, j)].clone();
                a[(r, j)] = a[(p, j)].clone();
                a[(p, j)] = tmp;
            }
        }
        let inv = S::one() / a[(r, c)].clone();
        for j in 0..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[(row, f)].clone();
            }
            v
        })
        .collect();
    (pivots.len(), kernel)
}

pub fn sup_norm_vec<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc.max_abs(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    fn leibniz(m: &Matrix<i64>) -> i64 {
        // independent permutation-sum oracle
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = m.rows();
        perms(n)
            .into_iter()
            .map(|p| {
                let mut inv = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if p[i] > p[j] {
                            inv += 1;
                        }
                    }
                }
                let prod: i64 = (0..n).map(|i| m[(i, p[i])]).product();
                if inv % 2 == 0 {
                    prod
                } else {
                    -prod
                }
            })
            .sum()
    }

    #[test]
    fn det_matches_leibniz() {
        let m = Matrix::from_rows(vec![
            vec![2i64, -1, 0, 3],
            vec![1, 4, -2, 0],
            vec![0, 5, 1, -1],
            vec![7, 0, 2, 2],
        ])
        .unwrap();
        assert_eq!(m.det(), leibniz(&m));
        assert_eq!(Matrix::<i64>::identity(5).det(), 1);
        assert_eq!(Matrix::<i64>::zeros(0, 0).det(), 1);
    }

    #[test]
    fn det_of_singular_is_zero() {
        let m = Matrix::from_rows(vec![vec![1i64, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap();
        assert_eq!(m.det(), 0);
    }

    #[test]
    fn kernel_of_rank_one() {
        let m: Matrix<Rational> =
            Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        let (rank, ker) = rank_and_kernel(&m);
        assert_eq!(rank, 1);
        assert_eq!(ker.len(), 1);
        let image = m.mul_vec(&ker[0]).unwrap();
        assert!(image.iter().all(Zero::is_zero));
    }
}
