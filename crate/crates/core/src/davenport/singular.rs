//! Points of `Sing V(c)` from a pair of subspaces, and `sigma` for
//! diagonal systems.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::dichotomy::SubspacePair;
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::matrix::{rank_and_kernel, sup_norm_vec, Matrix};
use crate::minors::index_tuples;
use crate::scalar::{approximate_rational, rational_from_f64, Rational, Scalar};

/// Largest denominator tried when snapping float bases to rationals.
const SNAP_DENOMINATOR: i64 = 10_000;
const SNAP_TOLERANCE: f64 = 1e-9;
/// Slices `u = (1, s, r)` used when `dim Y = 3`.
const SLICES: [(i64, i64); 9] = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2), (3, 1), (-3, 1)];

/// Exact copy of a form.
pub fn exact_form<S: Scalar>(c: &CubicForm<S>) -> Result<CubicForm<Rational>> {
    let terms = c
        .coefficients()
        .iter()
        .map(|(&idx, a)| Ok((idx, a.to_exact().ok_or(Error::NonFinite)?)))
        .collect::<Result<Vec<_>>>()?;
    CubicForm::new(c.n(), terms)
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    /// scaled so the first nonzero coordinate is 1
    pub point: Vec<String>,
    pub point_f64: Vec<f64>,
    /// `max_i |y^T H_c(x^(i)) y| / ||y||^2`
    pub equation_residual: f64,
    /// `||grad c(y)|| / (||c|| ||y||^2)`
    pub residual: f64,
    pub exact_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    /// number of equations, `n - dim X`
    pub b: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    /// both bases snapped to small rationals
    pub snapped: bool,
    /// complement of `X` used for the equations
    pub complement: Vec<Vec<f64>>,
    /// false when `dim Y > 3`: only the common kernel was searched
    pub complete: bool,
    pub candidates: Vec<Candidate>,
}

impl CandidateReport {
    pub fn min_residual(&self) -> Option<f64> {
        self.candidates.iter().map(|c| c.residual).reduce(f64::min)
    }
}

/// Row echelon form with partial pivoting; rows below `tol` are dropped.
fn rref(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let p = (r..a.len())
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("nonempty range");
        if a[p][c].abs() <= tol {
            continue;
        }
        a.swap(r, p);
        let piv = a[r][c];
        for v in a[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Rational basis for the span of `basis`: the echelon form with entries
/// rounded to small fractions when that moves nothing by more than
/// `SNAP_TOLERANCE`, the exact binary values otherwise.
fn rational_basis(basis: &[Vec<f64>]) -> Result<(Vec<Vec<Rational>>, bool)> {
    let echelon = rref(basis, 1e-10);
    let snapped: Vec<Vec<Rational>> = echelon
        .iter()
        .map(|row| row.iter().map(|&v| approximate_rational(v, SNAP_DENOMINATOR)).collect())
        .collect();
    let clean = echelon.len() == basis.len()
        && echelon.iter().zip(&snapped).all(|(row, srow)| {
            row.iter()
                .zip(srow)
                .all(|(v, s)| (v - s.as_f64()).abs() <= SNAP_TOLERANCE)
        });
    if clean {
        return Ok((snapped, true));
    }
    let exact = basis
        .iter()
        .map(|v| v.iter().map(|&x| rational_from_f64(x).ok_or(Error::NonFinite)).collect())
        .collect::<Result<_>>()?;
    Ok((exact, false))
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn quad(a: &Matrix<Rational>, u: &[Rational]) -> Rational {
    dot(u, &a.mul_vec(u).expect("square"))
}

fn exact_sqrt(q: &Rational) -> Option<Rational> {
    let root = |v: &BigInt| {
        let r = v.sqrt();
        (&r * &r == *v).then_some(r)
    };
    Some(Rational::new(root(q.numer())?, root(q.denom())?))
}

/// Real `s` with `a + 2 b s + c s^2 = 0`; irrational roots are rounded.
fn quadratic_roots(a: &Rational, b: &Rational, c: &Rational) -> Vec<Rational> {
    let two = Rational::from_i64(2);
    if c.is_zero() {
        if b.is_zero() {
            return Vec::new();
        }
        return vec![-a / (two * b)];
    }
    let disc = b * b - a * c;
    if disc.is_negative() {
        return Vec::new();
    }
    if let Some(r) = exact_sqrt(&disc) {
        let mut out = vec![(-b - &r) / c, (-b + &r) / c];
        out.dedup();
        return out;
    }
    let d = disc.as_f64().sqrt();
    let (bf, cf) = (b.as_f64(), c.as_f64());
    [(-bf - d) / cf, (-bf + d) / cf]
        .iter()
        .filter_map(|&s| rational_from_f64(s))
        .collect()
}

/// Solutions `u` of `u^T A_i u = 0` on the plane spanned by `p`, `q`.
fn solve_plane(forms: &[Matrix<Rational>], p: &[Rational], q: &[Rational]) -> Vec<Vec<Rational>> {
    let coeffs: Vec<(Rational, Rational, Rational)> = forms
        .iter()
        .map(|a| {
            let ap = a.mul_vec(p).expect("square");
            (dot(p, &ap), dot(q, &ap), quad(a, q))
        })
        .collect();
    let mut out = Vec::new();
    if coeffs.iter().all(|(_, _, c)| c.is_zero()) {
        out.push(q.to_vec());
    }
    let point = |s: &Rational| -> Vec<Rational> { p.iter().zip(q).map(|(x, y)| x + s * y).collect() };
    match coeffs.iter().find(|(a, b, c)| !(a.is_zero() && b.is_zero() && c.is_zero())) {
        // every equation vanishes on the plane: sample it
        None => {
            for s in [0, 1, -1] {
                out.push(point(&Rational::from_i64(s)));
            }
        }
        Some((a, b, c)) => {
            for s in quadratic_roots(a, b, c) {
                out.push(point(&s));
            }
        }
    }
    out
}

fn unit(d: usize, i: usize) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); d];
    e[i] = Rational::from_i64(1);
    e
}

/// Scale so the first nonzero entry is 1.
fn projective_normal(v: Vec<Rational>) -> Option<Vec<Rational>> {
    let lead = v.iter().find(|x| !x.is_zero())?.clone();
    Some(v.into_iter().map(|x| x / &lead).collect())
}

/// Solve the quadratic equations on `Y` cut out by a complement of `X` and
/// check the gradient at every solution. With `dim Y = 3` the projective
/// plane is searched along a fixed set of lines.
pub fn singular_candidates<S: Scalar>(c: &CubicForm<S>, pair: &SubspacePair) -> Result<CandidateReport> {
    let cq = exact_form(c)?;
    let n = cq.n();
    let norm = cq.sup_norm()?;
    for v in pair.x.iter().chain(&pair.y) {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if pair.y.is_empty() {
        return Err(Error::Invalid("Y is empty".into()));
    }
    let (xq, x_clean) = rational_basis(&pair.x)?;
    let (yq, y_clean) = rational_basis(&pair.y)?;
    let complement = if xq.is_empty() {
        (0..n).map(|i| unit(n, i)).collect()
    } else {
        let xm = Matrix::from_rows(xq.clone())?;
        rank_and_kernel(&xm).1
    };
    let d = yq.len();
    // u^T (Y^T H(x^(i)) Y) u on coordinates u of Y
    let forms: Vec<Matrix<Rational>> = complement
        .iter()
        .map(|x| {
            let h = cq.second_derivatives(x)?;
            Ok(Matrix::from_fn(d, d, |a, b| dot(&yq[a], &h.mul_vec(&yq[b]).expect("square"))))
        })
        .collect::<Result<_>>()?;

    let mut us: Vec<Vec<Rational>> = Vec::new();
    if forms.is_empty() {
        us.extend((0..d).map(|i| unit(d, i)));
    } else {
        let stacked: Vec<Vec<Rational>> = forms.iter().flat_map(|a| a.to_rows()).collect();
        us.extend(rank_and_kernel(&Matrix::from_rows(stacked)?).1);
    }
    let complete = d <= 3;
    match d {
        1 => us.push(unit(1, 0)),
        2 => us.extend(solve_plane(&forms, &unit(2, 0), &unit(2, 1))),
        3 => {
            for &(num, den) in &SLICES {
                let r = Rational::new(num.into(), den.into());
                let p = vec![Rational::from_i64(1), Rational::zero(), r];
                us.extend(solve_plane(&forms, &p, &unit(3, 1)));
            }
            us.extend(solve_plane(&forms, &unit(3, 1), &unit(3, 2)));
        }
        _ => {}
    }

    let mut seen: Vec<Vec<Rational>> = Vec::new();
    let mut candidates = Vec::new();
    for u in us {
        let mut y = vec![Rational::zero(); n];
        for (coef, basis) in u.iter().zip(&yq) {
            for (yi, bi) in y.iter_mut().zip(basis) {
                *yi += coef * bi;
            }
        }
        let Some(y) = projective_normal(y) else { continue };
        if seen.contains(&y) {
            continue;
        }
        let ysup = sup_norm_vec(&y);
        let y2 = &ysup * &ysup;
        let equation_residual = forms
            .iter()
            .map(|a| (quad(a, &u).abs() / &y2).as_f64())
            .fold(0.0, f64::max);
        // discard points that only satisfy the equations after rounding
        if equation_residual > 1e-9 {
            continue;
        }
        let grad = cq.gradient(&y)?;
        let residual = sup_norm_vec(&grad) / (&norm * &y2);
        candidates.push(Candidate {
            point: y.iter().map(ToString::to_string).collect(),
            point_f64: y.iter().map(Scalar::as_f64).collect(),
            equation_residual,
            residual: residual.as_f64(),
            exact_zero: residual.is_zero(),
        });
        seen.push(y);
    }
    Ok(CandidateReport {
        b: complement.len(),
        dim_x: pair.x.len(),
        dim_y: d,
        snapped: x_clean && y_clean,
        complement: complement
            .iter()
            .map(|v| v.iter().map(Scalar::as_f64).collect())
            .collect(),
        complete,
        candidates,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaReport {
    pub sigma: usize,
    pub rank: usize,
    /// a combination attaining the maximum
    pub beta: Vec<String>,
    /// coordinates where the combined coefficient vanishes
    pub vanishing: Vec<usize>,
}

fn column_rank(a: &Matrix<Rational>, cols: &[usize]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let rows: Vec<usize> = (0..a.rows()).collect();
    rank_and_kernel(&a.select(&rows, cols)).0
}

/// `1 + max dim Sing V(beta . c)` over `beta . c != 0` for diagonal forms.
/// `Sing V(sum a_j x_j^3)` is the coordinate subspace on the `j` with
/// `a_j = 0`, so the answer is the largest set of coefficient columns
/// lying in a hyperplane of the column span.
pub fn sigma_diagonal<S: Scalar>(forms: &[CubicForm<S>]) -> Result<SigmaReport> {
    let first = forms.first().ok_or_else(|| Error::Invalid("empty system".into()))?;
    let n = first.n();
    let mut rows = Vec::with_capacity(forms.len());
    for (i, f) in forms.iter().enumerate() {
        if f.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.n(),
            });
        }
        let diag = f.diagonal_coefficients().ok_or(Error::NonDiagonal(i))?;
        rows.push(
            diag.iter()
                .map(|v| v.to_exact().ok_or(Error::NonFinite))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let a = Matrix::from_rows(rows)?;
    let all: Vec<usize> = (0..n).collect();
    let rank = column_rank(&a, &all);
    if rank == 0 {
        return Err(Error::ZeroForm);
    }
    let flat_of = |gen: &[usize]| -> Vec<usize> {
        (0..n)
            .filter(|&j| {
                let mut cols = gen.to_vec();
                cols.push(j);
                column_rank(&a, &cols) == gen.len()
            })
            .collect()
    };
    let mut best: Vec<usize> = flat_of(&[]);
    if rank > 1 {
        for gen in index_tuples(rank - 1, n)?.tuples {
            if column_rank(&a, &gen) < rank - 1 {
                continue;
            }
            let flat = flat_of(&gen);
            if flat.len() > best.len() {
                best = flat;
            }
        }
    }
    // beta annihilates the flat but not every column
    let r = a.rows();
    let beta = if best.is_empty() {
        unit(r, (0..r).find(|&i| a.row(i).iter().any(|v| !v.is_zero())).expect("rank > 0"))
    } else {
        let rows_idx: Vec<usize> = (0..r).collect();
        let sub = a.select(&rows_idx, &best).transpose();
        rank_and_kernel(&sub)
            .1
            .into_iter()
            .find(|beta| (0..n).any(|j| !dot(beta, &a.column(j)).is_zero()))
            .expect("the flat is a proper subspace")
    };
    Ok(SigmaReport {
        sigma: best.len(),
        rank,
        beta: beta.iter().map(ToString::to_string).collect(),
        vanishing: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davenport::PairSource;
    use crate::forms::fermat;
    use crate::scalar::int;

    fn pair(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> SubspacePair {
        SubspacePair {
            x,
            y,
            source: PairSource::HessianMap { certified_bound: 0.0 },
            quality: 0.0,
            threshold: 0.0,
            kappa: 0.0,
            verified: true,
        }
    }

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn cylinder_plane_is_singular() {
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        let r = singular_candidates(&c, &pair((0..3).map(|i| e(3, i)).collect(), vec![e(3, 1), e(3, 2)]))
            .unwrap();
        assert_eq!(r.b, 0);
        assert!(!r.candidates.is_empty());
        for cand in &r.candidates {
            assert!(cand.exact_zero);
            assert_eq!(cand.point_f64[0], 0.0);
        }
    }

    #[test]
    fn cylinder_with_rotated_bases() {
        // X = span(e2, e3) given by a rotated basis, Y = R^3
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        let x = vec![vec![0.0, 0.6, 0.8], vec![0.0, -0.8, 0.6]];
        let r = singular_candidates(&c, &pair(x, (0..3).map(|i| e(3, i)).collect())).unwrap();
        assert!(r.snapped);
        assert_eq!(r.b, 1);
        assert!(r.candidates.iter().any(|c| c.exact_zero));
        assert!(r.candidates.iter().all(|c| c.exact_zero));
    }

    #[test]
    fn x1_squared_x2_recovers_the_singular_point() {
        let c = CubicForm::new(2, [([0, 0, 1], int(1))]).unwrap();
        let r = singular_candidates(&c, &pair(vec![e(2, 0), e(2, 1)], vec![e(2, 1)])).unwrap();
        assert_eq!(r.candidates.len(), 1);
        assert!(r.candidates[0].exact_zero);
        assert_eq!(r.candidates[0].point_f64, vec![0.0, 1.0]);
    }

    #[test]
    fn smooth_form_has_no_singular_candidates() {
        let f = fermat::<Rational>(3);
        let r = singular_candidates(&f, &pair(vec![e(3, 0)], (0..3).map(|i| e(3, i)).collect())).unwrap();
        for cand in &r.candidates {
            assert!(cand.residual > 1e-3);
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_diagonal(&[fermat::<Rational>(4)]).unwrap().sigma, 0);
        let c = CubicForm::diagonal(&[int(1), int(2), int(0)]).unwrap();
        assert_eq!(sigma_diagonal(&[c]).unwrap().sigma, 1);
        let c1 = fermat::<Rational>(4);
        let c2 = CubicForm::diagonal(&[int(1), int(-1), int(0), int(0)]).unwrap();
        let r = sigma_diagonal(&[c1, c2]).unwrap();
        assert_eq!(r.sigma, 2);
        assert_eq!(r.vanishing, vec![2, 3]);
        assert_eq!(r.beta, vec!["0", "1"]);
    }

    #[test]
    fn sigma_rejects_non_diagonal() {
        let c = CubicForm::new(2, [([0, 0, 1], int(1))]).unwrap();
        assert_eq!(sigma_diagonal(&[fermat::<Rational>(2), c]).unwrap_err(), Error::NonDiagonal(1));
    }
}
