//! Compound matrices, minors of Hessians and their Jacobians, singular
//! values, and the subspace lemmas relating minors to singular values.
//!
//! Tuples of row/column indices are strictly increasing and enumerated in
//! lexicographic order; a minors vector lists minors in lexicographic order
//! of (row tuple, column tuple), i.e. the row-major flattening of the
//! compound matrix.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::matrix::{det_of, Matrix, Ring};
use crate::scalar::Scalar;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Strictly increasing `k`-tuples from `0..l`, lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexTupleSet {
    pub k: usize,
    pub l: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl IndexTupleSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Position of a tuple in the lexicographic order.
    pub fn position(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).ok()
    }
}

pub fn index_tuples(k: usize, l: usize) -> Result<IndexTupleSet> {
    if k == 0 || k > l {
        return Err(Error::OutOfRange(format!(
            "tuple size {k} must lie in 1..={l}"
        )));
    }
    Ok(IndexTupleSet {
        k,
        l,
        tuples: tuples_unchecked(k, l),
    })
}

fn tuples_unchecked(k: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(l, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > l {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < l - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// The `k`-th compound matrix: entry `(a, b)` is the minor on rows `a`,
/// columns `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorsMatrix<S> {
    pub k: usize,
    pub row_tuples: Vec<Vec<usize>>,
    pub col_tuples: Vec<Vec<usize>>,
    pub matrix: Matrix<S>,
}

pub fn minors_matrix<S: Ring>(m: &Matrix<S>, k: usize) -> Result<MinorsMatrix<S>> {
    if k == 0 || k > m.rows().min(m.cols()) {
        return Err(Error::OutOfRange(format!(
            "minor size {k} exceeds {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let row_tuples = tuples_unchecked(k, m.rows());
    let col_tuples = tuples_unchecked(k, m.cols());
    let matrix = Matrix::from_fn(row_tuples.len(), col_tuples.len(), |a, b| {
        m.minor(&row_tuples[a], &col_tuples[b])
    });
    Ok(MinorsMatrix {
        k,
        row_tuples,
        col_tuples,
        matrix,
    })
}

/// Both sides of the multiplicativity of compound matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyBinetCheck<S> {
    pub compound_of_product: Matrix<S>,
    pub product_of_compounds: Matrix<S>,
    pub difference: Matrix<S>,
}

impl<S: Ring> CauchyBinetCheck<S> {
    pub fn holds(&self) -> bool {
        self.difference.is_zero()
    }
}

pub fn cauchy_binet<S: Ring>(l: &Matrix<S>, m: &Matrix<S>, k: usize) -> Result<CauchyBinetCheck<S>> {
    let product = l.matmul(m)?;
    if k == 0 || k > l.rows().min(l.cols()).min(m.cols()) {
        return Err(Error::OutOfRange(format!("minor size {k} out of range")));
    }
    let lhs = minors_matrix(&product, k)?.matrix;
    let rhs = minors_matrix(l, k)?
        .matrix
        .matmul(&minors_matrix(m, k)?.matrix)?;
    let difference = lhs.sub(&rhs)?;
    Ok(CauchyBinetCheck {
        compound_of_product: lhs,
        product_of_compounds: rhs,
        difference,
    })
}

/// All `k x k` minors of `H_c(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorsVector<S> {
    pub k: usize,
    pub entries: Vec<S>,
}

impl<S: Scalar> MinorsVector<S> {
    pub fn sup_norm(&self) -> S {
        crate::matrix::sup_norm_vec(&self.entries)
    }
}

/// Flattened compound matrix of a square matrix; `k = 0` gives `[1]`.
pub fn all_minors<S: Ring>(m: &Matrix<S>, k: usize) -> Vec<S> {
    if k == 0 {
        return vec![S::one()];
    }
    let tuples = tuples_unchecked(k, m.rows());
    let cols = tuples_unchecked(k, m.cols());
    let mut out = Vec::with_capacity(tuples.len() * cols.len());
    for a in &tuples {
        for b in &cols {
            out.push(m.minor(a, b));
        }
    }
    out
}

pub fn minors_vector<S: Scalar>(c: &CubicForm<S>, x: &[S], k: usize) -> Result<MinorsVector<S>> {
    if k == 0 || k > c.n() {
        return Err(Error::OutOfRange(format!("minor size {k} not in 1..={}", c.n())));
    }
    let h = c.hessian(x)?;
    Ok(MinorsVector {
        k,
        entries: all_minors(h.matrix(), k),
    })
}

/// Derivative at `s = 0` of `det(A + sB)`, both given on the same index sets.
fn det_directional<S: Ring>(a: &Matrix<S>, b: &Matrix<S>, rows: &[usize], cols: &[usize]) -> S {
    let k = rows.len();
    (0..k).fold(S::zero(), |acc, r| {
        acc + det_of(k, |i, j| {
            if i == r {
                b[(rows[i], cols[j])].clone()
            } else {
                a[(rows[i], cols[j])].clone()
            }
        })
    })
}

/// Jacobian of the minors vector: row = minor (same order as
/// [`minors_vector`]), column `t` = derivative along `e_t`.
pub fn minors_jacobian<S: Scalar>(c: &CubicForm<S>, x: &[S], k: usize) -> Result<Matrix<S>> {
    let n = c.n();
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("minor size {k} not in 1..={n}")));
    }
    let h = c.hessian(x)?;
    let directions: Vec<Matrix<S>> = (0..n)
        .map(|t| {
            let mut e = vec![S::zero(); n];
            e[t] = S::one();
            c.hessian(&e).map(|m| m.into_matrix())
        })
        .collect::<Result<_>>()?;
    let tuples = tuples_unchecked(k, n);
    let len = tuples.len() * tuples.len();
    let mut jac = Matrix::zeros(len, n);
    let mut row = 0;
    for a in &tuples {
        for b in &tuples {
            for (t, d) in directions.iter().enumerate() {
                jac[(row, t)] = det_directional(h.matrix(), d, a, b);
            }
            row += 1;
        }
    }
    Ok(jac)
}

/// Singular values in decreasing order, one per column of the source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    /// `Lambda_1 ... Lambda_k`.
    pub fn leading_product(&self, k: usize) -> f64 {
        self.values.iter().take(k).product()
    }

    /// `Lambda_i`, 1-based; zero past the end.
    pub fn get(&self, i: usize) -> f64 {
        if i == 0 {
            return f64::INFINITY;
        }
        self.values.get(i - 1).copied().unwrap_or(0.0)
    }
}

/// Singular values together with the matching right singular vectors.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`; orthonormal, length `n`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn svd_full(m: &Matrix<f64>) -> Result<FullSvd> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (rows, n) = (m.rows(), m.cols());
    if n == 0 {
        return Ok(FullSvd {
            values: vec![],
            vectors: vec![],
        });
    }
    // pad with zero rows so that V is a full n x n basis
    let padded_rows = rows.max(n);
    let a = DMatrix::from_fn(padded_rows, n, |i, j| if i < rows { m[(i, j)] } else { 0.0 });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|j| v_t[(i, j)]).collect())
        .collect();
    Ok(FullSvd { values, vectors })
}

pub fn singular_values(m: &Matrix<f64>) -> Result<SingularSpectrum> {
    Ok(SingularSpectrum {
        values: svd_full(m)?.values,
    })
}

/// Sorted absolute eigenvalues of a symmetric matrix (symmetric QR), an
/// independent route to the singular values.
pub fn abs_eigenvalues(m: &Matrix<f64>) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let eig = m.to_nalgebra().symmetric_eigenvalues();
    let mut v: Vec<f64> = eig.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// Eigenvalues of a symmetric matrix ordered by decreasing absolute value.
pub fn eigenvalues_by_magnitude(m: &Matrix<f64>) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let eig = m.to_nalgebra().symmetric_eigenvalues();
    let mut v: Vec<f64> = eig.iter().copied().collect();
    v.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// Both sides of `||Delta^(k)|| ~ Lambda_1 ... Lambda_k` with the constants
/// made explicit:
///   `Lambda_1...Lambda_k <= sqrt(C(m,k) C(n,k)) ||Delta^(k)||` and
///   `||Delta^(k)|| <= sqrt(C(n,k)) Lambda_1...Lambda_k`.
/// Both follow from `sum of squared k-minors = e_k(Lambda_1^2, ..)`.
#[derive(Debug, Clone, Serialize)]
pub struct MinorSvReport {
    pub k: usize,
    pub minors_sup: f64,
    pub sv_product: f64,
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub pass: bool,
}

pub const MINOR_SV_RELATIVE_TOLERANCE: f64 = 1e-9;

pub fn minor_sv_bounds(m: &Matrix<f64>, k: usize) -> Result<MinorSvReport> {
    let (rows, cols) = (m.rows(), m.cols());
    if k == 0 || k > rows.min(cols) {
        return Err(Error::OutOfRange(format!("minor size {k} out of range")));
    }
    let spectrum = singular_values(m)?;
    let minors_sup = all_minors(m, k).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sv_product = spectrum.leading_product(k);
    let lower_constant = ((binomial(rows, k) * binomial(cols, k)) as f64).sqrt();
    let upper_constant = (binomial(cols, k) as f64).sqrt();
    // rank-deficient inputs put both sides at rounding level
    let floor = 1e-12 * m.sup_norm().powi(k as i32);
    let le = |a: f64, b: f64| a <= b + MINOR_SV_RELATIVE_TOLERANCE * a.max(b) + floor;
    let lower_holds = le(sv_product, lower_constant * minors_sup);
    let upper_holds = le(minors_sup, upper_constant * sv_product);
    Ok(MinorSvReport {
        k,
        minors_sup,
        sv_product,
        lower_constant,
        upper_constant,
        lower_holds,
        upper_holds,
        pass: lower_holds && upper_holds,
    })
}

/// A coordinate subspace on which `M` is large.
#[derive(Debug, Clone, Serialize)]
pub struct BigSpace {
    /// column indices (0-based) spanning the subspace
    pub indices: Vec<usize>,
    /// row indices of the maximal minor
    pub rows: Vec<usize>,
    pub lambda_k: f64,
    /// `|Delta^(k)|_max / (k |Delta^(k-1)|_max)`: for every `v` in the span,
    /// `||Mv|| >= certified_lower * ||v||` (cofactor expansion).
    pub certified_lower: f64,
    /// `1 / (k sqrt(C(m,k) C(n,k) C(n,k-1)))`, so that
    /// `certified_lower >= kappa * Lambda_k`.
    pub kappa: f64,
}

pub fn big_subspace(m: &Matrix<f64>, k: usize) -> Result<BigSpace> {
    let (rows, cols) = (m.rows(), m.cols());
    if k == 0 || k > rows.min(cols) {
        return Err(Error::OutOfRange(format!("subspace size {k} out of range")));
    }
    let spectrum = singular_values(m)?;
    let lambda_k = spectrum.get(k);
    let row_tuples = tuples_unchecked(k, rows);
    let col_tuples = tuples_unchecked(k, cols);
    let mut best = (0.0f64, 0usize, 0usize);
    for (a, rt) in row_tuples.iter().enumerate() {
        for (b, ct) in col_tuples.iter().enumerate() {
            let v = m.minor(rt, ct).abs();
            // strict comparison: the first maximum in lexicographic order wins
            if v > best.0 {
                best = (v, a, b);
            }
        }
    }
    let scale = spectrum.get(1).max(f64::MIN_POSITIVE);
    if best.0 == 0.0 || lambda_k <= 1e-13 * scale {
        return Err(Error::RankDeficient { index: k });
    }
    let prev = if k == 1 {
        1.0
    } else {
        all_minors(m, k - 1).iter().fold(0.0f64, |a, v| a.max(v.abs()))
    };
    let kappa = 1.0
        / (k as f64
            * ((binomial(rows, k) * binomial(cols, k) * binomial(cols, k - 1)) as f64).sqrt());
    Ok(BigSpace {
        indices: col_tuples[best.2].clone(),
        rows: row_tuples[best.1].clone(),
        lambda_k,
        certified_lower: best.0 / (k as f64 * prev),
        kappa,
    })
}

/// A subspace on which `M` is small, spanned by right singular vectors.
#[derive(Debug, Clone, Serialize)]
pub struct SmallSpace {
    /// orthonormal basis, dimension `n - k + 1`
    pub basis: Vec<Vec<f64>>,
    pub lambda_k: f64,
    /// `sqrt(n)`: converts the Euclidean bound into the sup-norm bound
    pub sup_factor: f64,
    /// `||Mv||_inf <= certified_bound * ||v||_inf` on the span
    pub certified_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum SmallOrBig {
    Small(SmallSpace),
    Big(BigSpace),
}

/// Either an `(n-k+1)`-dimensional space where `||Mv|| <= C^{-1} ||v||`, or
/// `k` coordinate directions where `M` is bounded below by a multiple of
/// `C^{-1}`. Exactly one branch is returned.
pub fn small_or_big(m: &Matrix<f64>, k: usize, c: f64) -> Result<SmallOrBig> {
    if !(c >= 1.0) {
        return Err(Error::OutOfRange(format!("C = {c} must be at least 1")));
    }
    let n = m.cols();
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("k = {k} not in 1..={n}")));
    }
    let svd = svd_full(m)?;
    let lambda_k = svd.values[k - 1];
    let sup_factor = (n as f64).sqrt();
    let certified_bound = sup_factor * lambda_k;
    if certified_bound <= 1.0 / c || k > m.rows() {
        return Ok(SmallOrBig::Small(SmallSpace {
            basis: svd.vectors[k - 1..].to_vec(),
            lambda_k,
            sup_factor,
            certified_bound,
        }));
    }
    big_subspace(m, k).map(SmallOrBig::Big)
}

/// `sup_v ||Mv||_inf / ||v||_inf` over the given vectors.
pub fn max_sup_ratio(m: &Matrix<f64>, vectors: &[Vec<f64>]) -> f64 {
    vectors
        .iter()
        .filter_map(|v| {
            let vn = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if vn == 0.0 {
                return None;
            }
            let mv = m.mul_vec(v).ok()?;
            Some(mv.iter().fold(0.0f64, |a, x| a.max(x.abs())) / vn)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::scalar::{int, rat, Rational};
    use num_traits::Zero;

    fn mat(rows: Vec<Vec<i64>>) -> Matrix<i64> {
        Matrix::from_rows(rows).unwrap()
    }

    fn fmat(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn tuples_examples() {
        assert_eq!(index_tuples(1, 3).unwrap().tuples, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            index_tuples(2, 3).unwrap().tuples,
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        let t = index_tuples(3, 5).unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(t.tuples[0], vec![0, 1, 2]);
        assert_eq!(t.tuples[9], vec![2, 3, 4]);
        assert_eq!(t.position(&[1, 2, 4]), Some(7));
        assert!(index_tuples(4, 3).is_err());
    }

    #[test]
    fn tuple_counts_match_binomials() {
        for l in 1..=8 {
            for k in 1..=l {
                assert_eq!(index_tuples(k, l).unwrap().len(), binomial(l, k));
            }
        }
    }

    #[test]
    fn compound_examples() {
        let id = Matrix::<i64>::identity(4);
        for k in 1..=4 {
            let c = minors_matrix(&id, k).unwrap();
            assert_eq!(c.matrix, Matrix::identity(binomial(4, k)));
        }
        let m = mat(vec![vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(minors_matrix(&m, 2).unwrap().matrix.row(0), &[-3, -6, -3]);
        let d = Matrix::from_diagonal(&[3i64, 2, 1]);
        assert_eq!(
            minors_matrix(&d, 2).unwrap().matrix,
            Matrix::from_diagonal(&[6, 3, 2])
        );
        assert!(minors_matrix(&m, 3).is_err());
    }

    #[test]
    fn cauchy_binet_examples() {
        let l = mat(vec![vec![1, 2, 3], vec![4, 5, 6]]);
        let m = mat(vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        let check = cauchy_binet(&l, &m, 2).unwrap();
        assert_eq!(check.compound_of_product.data(), &[-6]);
        assert!(check.holds());
        let id = Matrix::<i64>::identity(3);
        assert!(cauchy_binet(&id, &id, 2).unwrap().holds());
        assert!(cauchy_binet(&l, &mat(vec![vec![1, 2]]), 1).is_err());
    }

    #[test]
    fn minors_vector_examples() {
        let f = fermat::<Rational>(3);
        let x = [int(1), int(2), int(3)];
        let d1 = minors_vector(&f, &x, 1).unwrap();
        assert_eq!(d1.entries.len(), 9);
        assert_eq!(d1.entries[0], int(6));
        assert_eq!(d1.entries[4], int(12));
        assert_eq!(d1.entries[8], int(18));
        assert_eq!(d1.entries.iter().filter(|v| v.is_zero()).count(), 6);
        let d3 = minors_vector(&f, &x, 3).unwrap();
        assert_eq!(d3.entries, vec![int(1296)]);
        let zero = [int(0), int(0), int(0)];
        for k in 1..=3 {
            assert!(minors_vector(&f, &zero, k)
                .unwrap()
                .entries
                .iter()
                .all(Zero::is_zero));
        }
    }

    #[test]
    fn jacobian_of_linear_minors_is_constant() {
        let f = fermat::<Rational>(2);
        for x in [[int(0), int(0)], [int(3), rat(-1, 2)]] {
            let j = minors_jacobian(&f, &x, 1).unwrap();
            // Delta^(1) = (6x1, 0, 0, 6x2)
            assert_eq!(j.row(0), &[int(6), int(0)]);
            assert_eq!(j.row(1), &[int(0), int(0)]);
            assert_eq!(j.row(2), &[int(0), int(0)]);
            assert_eq!(j.row(3), &[int(0), int(6)]);
        }
    }

    #[test]
    fn singular_value_examples() {
        let d = Matrix::from_diagonal(&[3.0, -2.0, 1.0]);
        let s = singular_values(&d).unwrap().values;
        for (a, b) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(singular_values(&Matrix::<f64>::zeros(3, 3))
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
        let nil = fmat(vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        let s = singular_values(&nil).unwrap().values;
        assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12);
        assert_eq!(
            singular_values(&fmat(vec![vec![f64::NAN]])),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn wide_matrix_has_n_singular_values() {
        let m = fmat(vec![vec![1.0, 2.0, 3.0]]);
        let svd = svd_full(&m).unwrap();
        assert_eq!(svd.values.len(), 3);
        assert!((svd.values[0] - 14f64.sqrt()).abs() < 1e-12);
        assert!(svd.values[1].abs() < 1e-12);
        assert_eq!(svd.vectors.len(), 3);
    }

    #[test]
    fn minor_sv_bound_examples() {
        let d = Matrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let r = minor_sv_bounds(&d, 2).unwrap();
        assert!((r.minors_sup - 6.0).abs() < 1e-12);
        assert!((r.sv_product - 6.0).abs() < 1e-12);
        assert!(r.pass);
        let rank_one = fmat(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        let r = minor_sv_bounds(&rank_one, 2).unwrap();
        assert!(r.minors_sup.abs() < 1e-12 && r.sv_product.abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn big_subspace_examples() {
        let d = Matrix::from_diagonal(&[3.0, 2.0, 1.0]);
        assert_eq!(big_subspace(&d, 2).unwrap().indices, vec![0, 1]);
        let p = fmat(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        assert_eq!(big_subspace(&p, 3).unwrap().indices, vec![0, 1, 2]);
        let singular = Matrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(
            big_subspace(&singular, 2).unwrap_err(),
            Error::RankDeficient { index: 2 }
        );
    }

    #[test]
    fn small_or_big_examples() {
        match small_or_big(&Matrix::zeros(3, 3), 2, 5.0).unwrap() {
            SmallOrBig::Small(s) => {
                assert_eq!(s.basis.len(), 2);
                assert_eq!(s.certified_bound, 0.0);
            }
            other => panic!("expected small space, got {other:?}"),
        }
        assert!(matches!(
            small_or_big(&Matrix::identity(2), 1, 2.0).unwrap(),
            SmallOrBig::Big(_)
        ));
        match small_or_big(&Matrix::from_diagonal(&[1.0, 1e-6, 1e-6]), 2, 1e3).unwrap() {
            SmallOrBig::Small(s) => assert_eq!(s.basis.len(), 2),
            other => panic!("expected small space, got {other:?}"),
        }
        assert!(small_or_big(&Matrix::identity(2), 1, 0.5).is_err());
    }
}
