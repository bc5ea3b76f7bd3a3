//! Davenport's construction: vectors built from `b x b` minors of `H_c(x)`
//! on which the trilinear form `Y^T H_c(t) Y'` is controlled.
//!
//! The explicit cofactor formulas assume the largest `b x b` minor of
//! `H_c(x0)` sits in the lower right corner. We pick that minor (first in
//! lexicographic order of row tuple, then column tuple), reorder rows and
//! columns so it lands there, and keep the reordering with the result. All
//! vectors returned to callers are in the original coordinates.

mod dichotomy;
mod singular;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::matrix::{det_of, Matrix};
use crate::minors::{binomial, eigenvalues_by_magnitude, index_tuples, minors_jacobian};
use crate::scalar::{Rational, Scalar};

pub use dichotomy::{dichotomy, BoundCertificate, Dichotomy, DichotomyParams, PairSource, SubspacePair};
pub use singular::{
    exact_form, sigma_diagonal, singular_candidates, Candidate, CandidateReport, SigmaReport,
};

/// Eigenvalue tolerance per variable: `|lambda_b| > 1e-9 n ||H||`.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;

fn sign_power<S: Scalar>(e: usize) -> S {
    if e % 2 == 0 {
        S::one()
    } else {
        -S::one()
    }
}

/// Rows of `order` that are not in `tuple`, ascending, followed by `tuple`.
fn lower_right_order(tuple: &[usize], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).filter(|i| !tuple.contains(i)).collect();
    order.extend_from_slice(tuple);
    order
}

/// The `b x b` minor of largest absolute value; ties go to the first in
/// lexicographic order.
pub fn largest_minor<S: Scalar>(h: &Matrix<S>, b: usize) -> Result<(Vec<usize>, Vec<usize>, S)> {
    let n = h.rows();
    let tuples = index_tuples(b, n)?.tuples;
    let mut best: Option<(usize, usize, S)> = None;
    for (a, rt) in tuples.iter().enumerate() {
        for (c, ct) in tuples.iter().enumerate() {
            let v = h.minor(rt, ct);
            if best.as_ref().is_none_or(|(_, _, m)| v.abs() > m.abs()) {
                best = Some((a, c, v));
            }
        }
    }
    let (a, c, v) = best.expect("at least one tuple");
    Ok((tuples[a].clone(), tuples[c].clone(), v))
}

/// The vectors `y^(1), .., y^(n-b)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct YVectors<S> {
    pub n: usize,
    pub b: usize,
    /// position -> original row index
    pub row_order: Vec<usize>,
    /// position -> original column index
    pub col_order: Vec<usize>,
    /// signed determinant of the lower right block after reordering
    pub minor: S,
    pub hessian: Matrix<S>,
    /// original coordinates
    pub vectors: Vec<Vec<S>>,
}

impl<S: Scalar> YVectors<S> {
    /// Entry `(k, l)` of the reordered Hessian.
    fn permuted(&self, k: usize, l: usize) -> S {
        self.hessian[(self.row_order[k], self.col_order[l])].clone()
    }

    /// Expected `(H y^(i))` in reordered row coordinates: a signed
    /// `(b+1) x (b+1)` minor for the first `n - b` rows, zero below.
    pub fn predicted_product(&self, i: usize) -> Vec<S> {
        let (n, m) = (self.n, self.n - self.b);
        let tail: Vec<usize> = (m..n).collect();
        (0..n)
            .map(|k| {
                if k >= m {
                    return S::zero();
                }
                let rows: Vec<usize> = std::iter::once(k).chain(tail.iter().copied()).collect();
                let cols: Vec<usize> = std::iter::once(i).chain(tail.iter().copied()).collect();
                sign_power::<S>(m) * det_of(self.b + 1, |r, s| self.permuted(rows[r], cols[s]))
            })
            .collect()
    }

    /// `H y^(i)` read in reordered row coordinates.
    pub fn product(&self, i: usize) -> Result<Vec<S>> {
        let hy = self.hessian.mul_vec(&self.vectors[i])?;
        Ok(self.row_order.iter().map(|&r| hy[r].clone()).collect())
    }
}

/// Build `y^(i)` from the cofactor formulas for a fixed reordering.
pub fn y_vectors_with_order<S: Scalar>(
    h: &Matrix<S>,
    b: usize,
    row_order: Vec<usize>,
    col_order: Vec<usize>,
) -> Result<YVectors<S>> {
    let n = h.rows();
    if b == 0 || b >= n {
        return Err(Error::OutOfRange(format!("b = {b} not in 1..={}", n.saturating_sub(1))));
    }
    let m = n - b;
    let at = |k: usize, l: usize| h[(row_order[k], col_order[l])].clone();
    let minor = det_of(b, |r, s| at(m + r, m + s));
    let vectors = (0..m)
        .map(|i| {
            let mut yp = vec![S::zero(); n];
            yp[i] = sign_power::<S>(m) * minor.clone();
            for j in m..n {
                let cols: Vec<usize> = std::iter::once(i).chain((m..n).filter(|&l| l != j)).collect();
                // 1-based column index j + 1 sets the sign
                yp[j] = sign_power::<S>(j + 1) * det_of(b, |r, s| at(m + r, cols[s]));
            }
            let mut y = vec![S::zero(); n];
            for (l, v) in yp.into_iter().enumerate() {
                y[col_order[l]] = v;
            }
            y
        })
        .collect();
    Ok(YVectors {
        n,
        b,
        row_order,
        col_order,
        minor,
        hessian: h.clone(),
        vectors,
    })
}

/// `y^(i)(x0)` with the largest `b x b` minor moved to the lower right.
pub fn build_y_vectors<S: Scalar>(c: &CubicForm<S>, x0: &[S], b: usize) -> Result<YVectors<S>> {
    let n = c.n();
    if b == 0 || b >= n {
        return Err(Error::OutOfRange(format!("b = {b} not in 1..={}", n.saturating_sub(1))));
    }
    let h = c.hessian(x0)?.into_matrix();
    let (rows, cols, value) = largest_minor(&h, b)?;
    if value.is_negligible() {
        return Err(Error::VanishingMinor { b });
    }
    y_vectors_with_order(&h, b, lower_right_order(&rows, n), lower_right_order(&cols, n))
}

/// The normalised basis `Y^(k) = y^(k) / ||Delta^(b)||` and the matrix `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DavenportSystem<S> {
    pub y: YVectors<S>,
    /// `||Delta^(b)(x0)||`, the absolute value of the chosen minor
    pub norm: S,
    /// `det Q` before the sign normalisation
    pub raw_det: S,
    /// whether every `y^(i)` was negated to reach `det Q = 1`
    pub flipped: bool,
    /// `Y^(1), .., Y^(n-b)`, original coordinates, after normalisation
    pub basis: Vec<Vec<S>>,
    /// columns `Y^(1), .., Y^(n-b), e_{n-b+1}, .., e_n` in reordered
    /// coordinates
    pub q: Matrix<S>,
    pub q_det: S,
    pub q_inverse: Matrix<S>,
    /// row-sum norm of `Q^{-1}`: `||gamma|| <= kappa ||Y||`
    pub kappa: S,
    /// every `|Q_ij| <= 1`
    pub entries_bounded: bool,
}

impl<S: Scalar> DavenportSystem<S> {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients of `v` in the basis `Y^(k)` (the first `n - b`
    /// coordinates of `Q^{-1} v` after reordering).
    pub fn coefficients(&self, v: &[S]) -> Result<Vec<S>> {
        let vp: Vec<S> = self.y.col_order.iter().map(|&l| v[l].clone()).collect();
        let g = self.q_inverse.mul_vec(&vp)?;
        Ok(g[..self.dimension()].to_vec())
    }

    /// `det Q = 1` and `|Q_ij| <= 1`.
    pub fn is_normalised(&self) -> bool {
        self.q_det == S::one() && self.entries_bounded
    }

    /// Basis in `f64`, for the sampled checks.
    pub fn basis_f64(&self) -> Vec<Vec<f64>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(Scalar::as_f64).collect())
            .collect()
    }
}

fn q_matrix<S: Scalar>(ys: &YVectors<S>, norm: &S, scale: &S) -> Matrix<S> {
    let (n, m) = (ys.n, ys.n - ys.b);
    Matrix::from_fn(n, n, |r, c| {
        if c < m {
            ys.vectors[c][ys.col_order[r]].clone() * scale.clone() / norm.clone()
        } else if r == c {
            S::one()
        } else {
            S::zero()
        }
    })
}

pub fn build_y_basis<S: Scalar>(c: &CubicForm<S>, x0: &[S], b: usize) -> Result<DavenportSystem<S>> {
    normalise(build_y_vectors(c, x0, b)?)
}

/// Complete a set of `y^(i)` with the normalised basis and `Q`.
pub fn normalise<S: Scalar>(mut ys: YVectors<S>) -> Result<DavenportSystem<S>> {
    let (n, m) = (ys.n, ys.n - ys.b);
    let norm = ys.minor.abs();
    if norm.is_negligible() {
        return Err(Error::VanishingMinor { b: ys.b });
    }
    let raw = q_matrix(&ys, &norm, &S::one());
    let raw_det = det_of(n, |r, c| raw[(r, c)].clone());
    // the top left block of Q is s I with s = (-1)^(n-b) sgn(minor)
    let s = sign_power::<S>(m) * ys.minor.signum();
    let flipped = s < S::zero();
    if flipped {
        for y in &mut ys.vectors {
            for v in y.iter_mut() {
                *v = -v.clone();
            }
        }
    }
    let q = q_matrix(&ys, &norm, &S::one());
    let q_det = det_of(n, |r, c| q[(r, c)].clone());
    let q_inverse = Matrix::from_fn(n, n, |r, c| {
        if r == c {
            S::one()
        } else if r >= m && c < m {
            -q[(r, c)].clone()
        } else {
            S::zero()
        }
    });
    let kappa = (0..n)
        .map(|r| (0..n).fold(S::zero(), |acc, c| acc + q_inverse[(r, c)].abs()))
        .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
    let entries_bounded = q.data().iter().all(|v| v.abs() <= S::one());
    let basis = ys
        .vectors
        .iter()
        .map(|y| y.iter().map(|v| v.clone() / norm.clone()).collect())
        .collect();
    Ok(DavenportSystem {
        y: ys,
        norm,
        raw_det,
        flipped,
        basis,
        q,
        q_det,
        q_inverse,
        kappa,
        entries_bounded,
    })
}

/// Outcome of the identity check at one point.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub x: Vec<i64>,
    /// `Delta^(b)(x) = 0`: the identity was checked with the identity
    /// reordering and no `Q` was built
    pub vanishing: bool,
    pub entries: usize,
    pub pass: bool,
    /// `det Q = 1` and `|Q_ij| <= 1`, when `Q` exists
    pub q_normalised: Option<bool>,
}

fn ints(x: &[i64]) -> Vec<Rational> {
    x.iter().map(|&v| Rational::from_i64(v)).collect()
}

/// Exact componentwise check of `H y^(i) = signed (b+1)-minors` at `x`.
pub fn check_identity_at(c: &CubicForm<Rational>, x: &[i64], b: usize) -> Result<IdentityCheck> {
    let xq = ints(x);
    let (ys, q_normalised) = match build_y_vectors(c, &xq, b) {
        Ok(ys) => {
            let sys = normalise(ys.clone())?;
            (ys, Some(sys.is_normalised()))
        }
        Err(Error::VanishingMinor { .. }) => {
            let h = c.hessian(&xq)?.into_matrix();
            let id: Vec<usize> = (0..c.n()).collect();
            (y_vectors_with_order(&h, b, id.clone(), id)?, None)
        }
        Err(e) => return Err(e),
    };
    let mut pass = true;
    let mut entries = 0;
    for i in 0..ys.vectors.len() {
        let got = ys.product(i)?;
        let want = ys.predicted_product(i);
        entries += got.len();
        pass &= got == want;
    }
    Ok(IdentityCheck {
        x: x.to_vec(),
        vanishing: q_normalised.is_none(),
        entries,
        pass,
        q_normalised,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub b: usize,
    pub trials: usize,
    pub passed: usize,
    pub vanishing: usize,
    pub q_checked: usize,
    pub q_passed: usize,
    pub all_pass: bool,
    pub checks: Vec<IdentityCheck>,
}

/// Random points in `[-radius, radius]^n`, one RNG stream per trial.
pub fn verify_hy_identity(
    c: &CubicForm<Rational>,
    b: usize,
    trials: usize,
    radius: i64,
    seed: u64,
) -> Result<IdentityReport> {
    let n = c.n();
    if b == 0 || b >= n {
        return Err(Error::OutOfRange(format!("b = {b} not in 1..={}", n.saturating_sub(1))));
    }
    c.sup_norm()?;
    let checks: Vec<IdentityCheck> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let x: Vec<i64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
            check_identity_at(c, &x, b)
        })
        .collect::<Result<_>>()?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let q_checked = checks.iter().filter(|c| c.q_normalised.is_some()).count();
    let q_passed = checks.iter().filter(|c| c.q_normalised == Some(true)).count();
    Ok(IdentityReport {
        b,
        trials,
        passed,
        vanishing: trials - q_checked,
        q_checked,
        q_passed,
        all_pass: passed == trials && q_passed == q_checked,
        checks,
    })
}

/// Constant in `|Y^(j)T H(t) Y^(i)| <= kappa (||J^(b+1) t|| / ||Delta^(b)||
/// + |lambda_(b+1)| ||t|| / |lambda_b|)` for basis vectors.
///
/// The first term carries at most `b + 1` nonzero entries of `y^(j)`; the
/// second bounds `(H y^(j))^T d_t y^(i)` with `n - b` nonzero entries, a
/// derivative of a `b x b` minor by `6 n b^2 ||Delta^(b-1)|| ||t||`, and the
/// minor ratios by `C(n,b)^2 sqrt(C(n,b+1) C(n,b-1))` times the eigenvalue
/// ratio.
pub fn trilinear_kappa(n: usize, b: usize) -> f64 {
    let (nf, bf) = (n as f64, b as f64);
    let minors = (binomial(n, b) as f64).powi(2)
        * ((binomial(n, b + 1) * binomial(n, b - 1)) as f64).sqrt();
    (bf + 1.0).max((nf - bf) * 6.0 * nf * bf * bf * minors)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrilinearReport {
    pub b: usize,
    pub samples: usize,
    pub lambda_b: f64,
    pub lambda_b1: f64,
    pub max_ratio: f64,
    /// direction attaining the maximum
    pub worst_t: Vec<f64>,
    pub kappa: f64,
    pub pass: bool,
}

/// Largest ratio of `|Y^T H_c(t) Y'|` (basis pairs) to the right-hand side
/// over `t = x0`, the coordinate vectors and `samples` random directions.
pub fn trilinear_bound_check<S: Scalar>(
    c: &CubicForm<S>,
    x0: &[S],
    b: usize,
    samples: usize,
    seed: u64,
) -> Result<TrilinearReport> {
    let n = c.n();
    let sys = build_y_basis(c, x0, b)?;
    let cf = c.to_float();
    let x0f: Vec<f64> = x0.iter().map(Scalar::as_f64).collect();
    let h = cf.hessian(&x0f)?.into_matrix();
    let eig = eigenvalues_by_magnitude(&h)?;
    let tol = EIGENVALUE_TOLERANCE * n as f64 * h.sup_norm();
    let lambda_b = eig[b - 1].abs();
    if lambda_b <= tol {
        return Err(Error::ZeroEigenvalue { index: b });
    }
    let lambda_b1 = eig[b].abs();
    let jac = minors_jacobian(&cf, &x0f, b + 1)?;
    let delta = sys.norm.as_f64();
    let basis = sys.basis_f64();

    let mut directions: Vec<Vec<f64>> = vec![x0f.clone()];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        directions.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        directions.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut best = (0.0f64, vec![0.0; n]);
    for t in &directions {
        let tn = sup(t);
        if tn == 0.0 {
            continue;
        }
        let ht = cf.hessian(t)?.into_matrix();
        let rhs = sup(&jac.mul_vec(t)?) / delta + lambda_b1 * tn / lambda_b;
        for yi in &basis {
            let hy = ht.mul_vec(yi)?;
            for yj in &basis {
                let lhs: f64 = yj.iter().zip(&hy).map(|(a, b)| a * b).sum::<f64>().abs();
                let ratio = if rhs > 0.0 {
                    lhs / rhs
                } else if lhs <= 1e-12 * tn {
                    0.0
                } else {
                    f64::INFINITY
                };
                if ratio > best.0 {
                    best = (ratio, t.clone());
                }
            }
        }
    }
    let kappa = trilinear_kappa(n, b);
    Ok(TrilinearReport {
        b,
        samples: directions.len(),
        lambda_b,
        lambda_b1,
        max_ratio: best.0,
        worst_t: best.1,
        kappa,
        pass: best.0 <= kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::minors::all_minors;
    use crate::scalar::{int, rat};
    use num_traits::{One, Signed, Zero};

    fn q(v: &[i64]) -> Vec<Rational> {
        ints(v)
    }

    #[test]
    fn fermat_first_vector() {
        let f = fermat::<Rational>(3);
        let ys = build_y_vectors(&f, &q(&[1, 2, 3]), 2).unwrap();
        assert_eq!(ys.row_order, vec![0, 1, 2]);
        assert_eq!(ys.col_order, vec![0, 1, 2]);
        assert_eq!(ys.minor, int(216));
        assert_eq!(ys.vectors, vec![q(&[-216, 0, 0])]);
        assert_eq!(ys.product(0).unwrap(), q(&[-1296, 0, 0]));
        assert_eq!(ys.predicted_product(0), q(&[-1296, 0, 0]));
        // -1296 = -det H
        let h = f.hessian(&q(&[1, 2, 3])).unwrap();
        assert_eq!(h.matrix().det(), int(1296));
    }

    #[test]
    fn fermat_basis_flips_sign() {
        let f = fermat::<Rational>(3);
        let sys = build_y_basis(&f, &q(&[1, 2, 3]), 2).unwrap();
        assert_eq!(sys.raw_det, int(-1));
        assert!(sys.flipped);
        assert_eq!(sys.q, Matrix::identity(3));
        assert_eq!(sys.q_det, int(1));
        assert_eq!(sys.basis, vec![q(&[1, 0, 0])]);
        assert!(sys.is_normalised());
    }

    #[test]
    fn diagonal_hessian_vectors_are_supported_on_one_coordinate() {
        let c = CubicForm::diagonal(&[int(1), int(2), int(-3), int(5)]).unwrap();
        let x = q(&[1, 1, 1, 1]);
        let h = c.hessian(&x).unwrap().into_matrix();
        for b in 1..4 {
            let ys = build_y_vectors(&c, &x, b).unwrap();
            let mut diag: Vec<Rational> = (0..4).map(|i| h[(i, i)].abs()).collect();
            diag.sort();
            let top: Rational = diag.iter().rev().take(b).fold(Rational::one(), |a, v| a * v);
            for (i, y) in ys.vectors.iter().enumerate() {
                let support: Vec<usize> = (0..4).filter(|&j| !y[j].is_zero()).collect();
                assert_eq!(support.len(), 1, "b = {b}, i = {i}");
                assert_eq!(y[support[0]].abs(), top);
            }
            let sys = normalise(ys).unwrap();
            assert!(sys.is_normalised());
        }
    }

    #[test]
    fn vanishing_minor_is_reported() {
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        assert_eq!(
            build_y_vectors(&c, &q(&[1, 1, 1]), 2).unwrap_err(),
            Error::VanishingMinor { b: 2 }
        );
        assert!(matches!(build_y_vectors(&c, &q(&[1, 1, 1]), 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn zero_hessian_gives_zero_on_both_sides() {
        let c = fermat::<Rational>(3);
        let r = check_identity_at(&c, &[0, 0, 0], 1).unwrap();
        assert!(r.vanishing && r.pass);
    }

    #[test]
    fn products_are_signed_minors() {
        // oracle: every entry of H y must be 0 or +- some (b+1)-minor
        let c = CubicForm::new(
            4,
            [([0, 1, 2], int(3)), ([1, 1, 3], int(-2)), ([0, 0, 0], int(1)), ([2, 3, 3], int(5))],
        )
        .unwrap();
        let x = q(&[2, -1, 3, 1]);
        let h = c.hessian(&x).unwrap().into_matrix();
        for b in 1..4 {
            let Ok(ys) = build_y_vectors(&c, &x, b) else { continue };
            let big = all_minors(&h, b + 1);
            let small = all_minors(&h, b);
            for (i, y) in ys.vectors.iter().enumerate() {
                for v in y {
                    assert!(v.is_zero() || small.iter().any(|m| m.abs() == v.abs()));
                }
                let hy = h.mul_vec(y).unwrap();
                for v in &hy {
                    assert!(v.is_zero() || big.iter().any(|m| m.abs() == v.abs()), "b = {b}, i = {i}");
                }
            }
        }
        let r = verify_hy_identity(&c, 2, 50, 9, 7).unwrap();
        assert!(r.all_pass);
    }

    #[test]
    fn gamma_recovery() {
        let c = CubicForm::new(
            3,
            [([0, 1, 2], int(1)), ([0, 0, 1], int(2)), ([2, 2, 2], int(1)), ([1, 1, 1], int(-1))],
        )
        .unwrap();
        let sys = build_y_basis(&c, &q(&[1, 2, -1]), 1).unwrap();
        assert!(sys.is_normalised());
        let gamma = [rat(3, 7), int(-2)];
        let mut v = vec![Rational::zero(); 3];
        for (g, y) in gamma.iter().zip(&sys.basis) {
            for (vi, yi) in v.iter_mut().zip(y) {
                *vi = vi.clone() + g.clone() * yi.clone();
            }
        }
        assert_eq!(sys.coefficients(&v).unwrap(), gamma.to_vec());
        assert!(sys.kappa >= Rational::one());
    }

    #[test]
    fn trilinear_ratio_is_finite_and_bounded() {
        let f = fermat::<Rational>(4);
        let r = trilinear_bound_check(&f, &q(&[1, 2, 3, 4]), 2, 1000, 11).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.max_ratio - 2.351793938789722).abs() < 1e-9, "{}", r.max_ratio);
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        assert_eq!(
            trilinear_bound_check(&c, &q(&[1, 1, 1]), 1, 10, 1).unwrap().max_ratio,
            0.0
        );
    }
}
