//! Cubic forms, their normalised Hessians and the associated trilinear form.
//!
//! A form is stored by its monomial coefficients `a_{ijk}` (i <= j <= k), so
//! that `c(x) = sum a_{ijk} x_i x_j x_k`. The fully symmetric third-derivative
//! tensor `D_{ijk} = d^3 c / dx_i dx_j dx_k` is derived once at construction:
//! `D = 6a` on the diagonal, `2a` when exactly two indices agree, `a` when all
//! three differ. The form norm is `max |D| / 6`, so an integer form has norm
//! equal to its largest monomial coefficient only when that coefficient sits
//! on a pure cube.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Backend, Scalar};

/// Homogeneous cubic form in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicForm<S> {
    n: usize,
    coeffs: BTreeMap<[usize; 3], S>,
    /// third derivatives, row-major n^3
    tensor: Vec<S>,
}

fn canonical(mut idx: [usize; 3]) -> [usize; 3] {
    idx.sort_unstable();
    idx
}

fn multiplicity(idx: [usize; 3]) -> i64 {
    let [i, j, k] = idx;
    if i == j && j == k {
        6
    } else if i == j || j == k || i == k {
        2
    } else {
        1
    }
}

impl<S: Scalar> CubicForm<S> {
    /// Builds a form from monomial coefficients. Index triples may be given in
    /// any order; repeated monomials accumulate. Indices are 0-based.
    pub fn new<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([usize; 3], S)>,
    {
        if n == 0 {
            return Err(Error::OutOfRange("a form needs at least one variable".into()));
        }
        let mut coeffs: BTreeMap<[usize; 3], S> = BTreeMap::new();
        for (idx, value) in terms {
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bad + 1,
                });
            }
            let key = canonical(idx);
            let entry = coeffs.entry(key).or_insert_with(S::zero);
            *entry = entry.clone() + value;
        }
        coeffs.retain(|_, v| !v.is_zero());
        let mut tensor = vec![S::zero(); n * n * n];
        for (&idx, a) in &coeffs {
            let d = a.clone() * S::from_i64(multiplicity(idx));
            let [i, j, k] = idx;
            for [p, q, r] in [[i, j, k], [i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                tensor[(p * n + q) * n + r] = d.clone();
            }
        }
        Ok(CubicForm { n, coeffs, tensor })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    /// `sum_i a_i x_i^3`.
    pub fn diagonal(coeffs: &[S]) -> Result<Self> {
        Self::new(
            coeffs.len(),
            coeffs.iter().enumerate().map(|(i, a)| ([i, i, i], a.clone())),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    /// Nonzero monomial coefficients, keyed by sorted 0-based index triples.
    pub fn coefficients(&self) -> &BTreeMap<[usize; 3], S> {
        &self.coeffs
    }

    pub fn coefficient(&self, idx: [usize; 3]) -> S {
        self.coeffs
            .get(&canonical(idx))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// `d^3 c / dx_i dx_j dx_k`.
    pub fn third_derivative(&self, i: usize, j: usize, k: usize) -> &S {
        &self.tensor[(i * self.n + j) * self.n + k]
    }

    fn check_dim(&self, v: &[S]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[S]) -> Result<S> {
        self.check_dim(x)?;
        Ok(self.coeffs.iter().fold(S::zero(), |acc, (&[i, j, k], a)| {
            acc + a.clone() * x[i].clone() * x[j].clone() * x[k].clone()
        }))
    }

    /// `||c|| = max |D_{ijk}| / 6`.
    pub fn sup_norm(&self) -> Result<S> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let max = self
            .coeffs
            .iter()
            .fold(S::zero(), |acc, (&idx, a)| {
                acc.max_abs(&(a.clone() * S::from_i64(multiplicity(idx))))
            });
        Ok(max / S::from_i64(6))
    }

    /// Matrix of second partials of `c` itself at `x` (no normalisation).
    /// Entry (i, j) is `sum_k D_{ijk} x_k`; linear in `x`.
    pub fn second_derivatives(&self, x: &[S]) -> Result<Matrix<S>> {
        self.check_dim(x)?;
        let n = self.n;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let base = (i * n + j) * n;
                let v = (0..n).fold(S::zero(), |acc, k| {
                    let d = &self.tensor[base + k];
                    if d.is_zero() {
                        acc
                    } else {
                        acc + d.clone() * x[k].clone()
                    }
                });
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Normalised Hessian `H_c(x)`, the Hessian of `c / ||c||` at `x`.
    pub fn hessian(&self, x: &[S]) -> Result<SymMatrix<S>> {
        let norm = self.sup_norm()?;
        let m = self.second_derivatives(x)?;
        Ok(SymMatrix(m.map(|v| v.clone() / norm.clone())))
    }

    /// `y^T H_c(x) z`; symmetric in all three arguments.
    pub fn trilinear(&self, x: &[S], y: &[S], z: &[S]) -> Result<S> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        self.check_dim(z)?;
        let norm = self.sup_norm()?;
        let n = self.n;
        let mut acc = S::zero();
        for i in 0..n {
            if y[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if z[j].is_zero() {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    let d = &self.tensor[base + k];
                    if !d.is_zero() {
                        acc = acc + d.clone() * y[i].clone() * z[j].clone() * x[k].clone();
                    }
                }
            }
        }
        Ok(acc / norm)
    }

    /// Gradient of `c` (unnormalised) at `y`.
    pub fn gradient(&self, y: &[S]) -> Result<Vec<S>> {
        self.check_dim(y)?;
        let n = self.n;
        let two = S::from_i64(2);
        Ok((0..n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..n {
                    for k in 0..n {
                        let d = &self.tensor[(i * n + j) * n + k];
                        if !d.is_zero() {
                            acc = acc + d.clone() * y[j].clone() * y[k].clone();
                        }
                    }
                }
                acc / two.clone()
            })
            .collect())
    }

    pub fn scale(&self, lambda: &S) -> Self {
        Self::new(
            self.n,
            self.coeffs
                .iter()
                .map(|(&idx, a)| (idx, a.clone() * lambda.clone())),
        )
        .expect("scaling preserves the index range")
    }

    /// Coefficients `a_i` when the form is `sum a_i x_i^3`.
    pub fn diagonal_coefficients(&self) -> Option<Vec<S>> {
        if self.coeffs.keys().any(|&[i, j, k]| i != j || j != k) {
            return None;
        }
        Some((0..self.n).map(|i| self.coefficient([i, i, i])).collect())
    }

    /// Matrix of the linear map `x -> H_c(x)`: row `(i, j)` (row-major over
    /// the n x n entries), column `t` holds `H_c(e_t)_{ij}`.
    pub fn hessian_map_matrix(&self) -> Result<Matrix<S>> {
        let norm = self.sup_norm()?;
        let n = self.n;
        Ok(Matrix::from_fn(n * n, n, |row, t| {
            let (i, j) = (row / n, row % n);
            self.tensor[(i * n + j) * n + t].clone() / norm.clone()
        }))
    }
}

impl<S: Scalar> CubicForm<S> {
    /// Floating-point copy (identity for float forms).
    pub fn to_float(&self) -> CubicForm<f64> {
        CubicForm::new(
            self.n,
            self.coeffs.iter().map(|(&idx, a)| (idx, a.as_f64())),
        )
        .expect("same index range")
    }
}

/// Coefficientwise `beta_1 c_1 + ... + beta_R c_R`.
pub fn linear_combination<S: Scalar>(beta: &BetaVector<S>, forms: &[CubicForm<S>]) -> Result<CubicForm<S>> {
    if beta.0.len() != forms.len() {
        return Err(Error::DimensionMismatch {
            expected: forms.len(),
            found: beta.0.len(),
        });
    }
    let n = forms.first().map_or(0, |c| c.n);
    if let Some(bad) = forms.iter().find(|c| c.n != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.n,
        });
    }
    if forms.is_empty() {
        return Err(Error::Invalid("empty system of forms".into()));
    }
    CubicForm::new(
        n,
        forms.iter().zip(&beta.0).flat_map(|(c, b)| {
            c.coeffs
                .iter()
                .map(move |(&idx, a)| (idx, a.clone() * b.clone()))
        }),
    )
}

/// Real symmetric matrix, typically `H_c(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix<S>(Matrix<S>);

impl<S: Scalar> SymMatrix<S> {
    pub fn new(m: Matrix<S>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        for i in 0..m.rows() {
            for j in i + 1..m.rows() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.0
    }

    /// `max_{ij} |H_{ij}|`.
    pub fn sup_norm(&self) -> S {
        self.0.sup_norm()
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        SymMatrix(self.0.to_f64())
    }
}

/// Coefficients of a linear combination of forms.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVector<S>(pub Vec<S>);

impl BetaVector<f64> {
    pub fn new_float(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(BetaVector(values))
    }
}

impl<S: Scalar> BetaVector<S> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fermat cubic `x_1^3 + ... + x_n^3`.
pub fn fermat<S: Scalar>(n: usize) -> CubicForm<S> {
    CubicForm::diagonal(&vec![S::one(); n]).expect("n >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};
    use num_traits::{One, Zero};

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| int(a)).collect()
    }

    /// Third derivative of a monomial form computed symbolically by exponent
    /// bookkeeping, independent of the stored tensor.
    fn symbolic_third(c: &CubicForm<Rational>, i: usize, j: usize, k: usize) -> Rational {
        let mut total = Rational::zero();
        for (&idx, a) in c.coefficients() {
            let mut exps = vec![0i64; c.n()];
            for &t in &idx {
                exps[t] += 1;
            }
            let mut coeff = a.clone();
            for &d in &[i, j, k] {
                if exps[d] == 0 {
                    coeff = Rational::zero();
                    break;
                }
                coeff = coeff * int(exps[d]);
                exps[d] -= 1;
            }
            total = total + coeff;
        }
        total
    }

    #[test]
    fn eval_examples() {
        let cube = CubicForm::new(1, [([0, 0, 0], int(1))]).unwrap();
        assert_eq!(cube.eval(&q(&[2])).unwrap(), int(8));
        let f = fermat::<Rational>(3);
        assert_eq!(f.eval(&q(&[1, -1, 0])).unwrap(), int(0));
        let c = CubicForm::new(2, [([0, 0, 1], int(1))]).unwrap();
        assert_eq!(c.eval(&q(&[3, 2])).unwrap(), int(18));
        assert!(matches!(
            c.eval(&q(&[1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sup_norm_examples() {
        let cube = CubicForm::new(1, [([0, 0, 0], int(1))]).unwrap();
        assert_eq!(cube.sup_norm().unwrap(), int(1));
        let two = CubicForm::new(1, [([0, 0, 0], int(2))]).unwrap();
        assert_eq!(two.sup_norm().unwrap(), int(2));
        let c = CubicForm::new(2, [([1, 0, 0], int(1))]).unwrap();
        assert_eq!(c.sup_norm().unwrap(), rat(1, 3));
        // symbolic oracle agrees
        assert_eq!(symbolic_third(&c, 0, 0, 1), int(2));
        assert_eq!(
            CubicForm::<Rational>::zero(3).unwrap().sup_norm(),
            Err(Error::ZeroForm)
        );
    }

    #[test]
    fn tensor_matches_symbolic_derivatives() {
        let c = CubicForm::new(
            3,
            [
                ([0, 0, 0], int(2)),
                ([0, 1, 2], int(-5)),
                ([1, 1, 2], rat(3, 2)),
                ([2, 2, 2], int(7)),
                ([0, 2, 2], int(1)),
            ],
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(c.third_derivative(i, j, k), &symbolic_third(&c, i, j, k));
                }
            }
        }
    }

    #[test]
    fn hessian_examples() {
        let f = fermat::<Rational>(3);
        let h = f.hessian(&q(&[1, 2, 3])).unwrap();
        assert_eq!(h.matrix(), &Matrix::from_diagonal(&q(&[6, 12, 18])));
        assert!(f.hessian(&q(&[0, 0, 0])).unwrap().matrix().is_zero());
        let two = CubicForm::new(1, [([0, 0, 0], int(2))]).unwrap();
        assert_eq!(two.hessian(&q(&[1])).unwrap().matrix()[(0, 0)], int(6));
        assert_eq!(
            CubicForm::<Rational>::zero(2).unwrap().hessian(&q(&[1, 1])),
            Err(Error::ZeroForm)
        );
    }

    #[test]
    fn trilinear_examples() {
        let f = fermat::<Rational>(3);
        let ones = q(&[1, 1, 1]);
        assert_eq!(f.trilinear(&ones, &ones, &ones).unwrap(), int(18));
        assert_eq!(f.trilinear(&ones, &q(&[0, 0, 0]), &ones).unwrap(), int(0));
    }

    #[test]
    fn linear_combination_examples() {
        let c1 = CubicForm::new(1, [([0, 0, 0], int(1))]).unwrap();
        let c2 = CubicForm::new(1, [([0, 0, 0], int(-1))]).unwrap();
        let cs = vec![c1.clone(), c2.clone()];
        assert_eq!(
            linear_combination(&BetaVector(q(&[1, 0])), &cs).unwrap(),
            c1
        );
        assert!(linear_combination(&BetaVector(q(&[0, 0])), &cs)
            .unwrap()
            .is_zero());
        assert!(linear_combination(&BetaVector(q(&[1, 1])), &cs)
            .unwrap()
            .is_zero());
        assert!(linear_combination(&BetaVector(q(&[1])), &cs).is_err());
    }

    #[test]
    fn gradient_matches_definition() {
        let c = CubicForm::new(2, [([0, 0, 1], int(1))]).unwrap();
        // grad of x1^2 x2 = (2 x1 x2, x1^2)
        assert_eq!(c.gradient(&q(&[3, 5])).unwrap(), q(&[30, 9]));
    }

    #[test]
    fn beta_rejects_non_finite() {
        assert!(BetaVector::new_float(vec![1.0, f64::NAN]).is_err());
        assert!(BetaVector::new_float(vec![0.0, 0.0]).is_ok());
    }

    #[test]
    fn hessian_map_columns_are_hessians_of_basis_vectors() {
        let c = CubicForm::new(2, [([0, 0, 1], int(3)), ([1, 1, 1], int(1))]).unwrap();
        let m = c.hessian_map_matrix().unwrap();
        for t in 0..2 {
            let mut e = vec![Rational::zero(); 2];
            e[t] = Rational::one();
            let h = c.hessian(&e).unwrap();
            for row in 0..4 {
                assert_eq!(m[(row, t)], h.matrix()[(row / 2, row % 2)]);
            }
        }
    }
}
