use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dyadic::{DyadicClass, SpectrumOracle};
use super::enumerate::{box_size, decode, is_half_representative, matrix_system, IntegerHessian};
use super::{ClassCount, CountReport, Strictness};
use crate::error::{Error, Result};
use crate::forms::{CubicForm, SymMatrix};
use crate::scalar::Scalar;

fn check_radius(b: i64) -> Result<()> {
    if b < 1 {
        return Err(Error::OutOfRange(format!("B = {b} must be at least 1")));
    }
    Ok(())
}

/// `#{ y : |y| <= B, |Hy| <= B }` (or `< B`).
pub fn count_nh<S: Scalar>(h: &SymMatrix<S>, b: i64, strictness: Strictness) -> Result<CountReport> {
    check_radius(b)?;
    let count = matrix_system(h, b, strictness.is_strict())?.count();
    Ok(CountReport::plain(count, b, strictness))
}

/// Sum over the box of `f(x)`, using `f(-x) = f(x)`.
fn symmetric_sum<F>(n: usize, b: i64, f: F) -> Result<u64>
where
    F: Fn(&[i64]) -> Result<u64> + Sync,
{
    let total = box_size(n, b)?;
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            if !is_half_representative(&x) {
                return Ok(0);
            }
            let v = f(&x)?;
            Ok(if x.iter().all(|&v| v == 0) { v } else { 2 * v })
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// `N^aux_c(B)`: pairs with `|x|, |y| <= B` and `|H_c(x) y| < B` (strict)
/// or `<= B` (weak).
pub fn count_aux<S: Scalar>(c: &CubicForm<S>, b: i64, strictness: Strictness) -> Result<CountReport> {
    check_radius(b)?;
    let ih = IntegerHessian::new(c)?;
    let strict = strictness.is_strict();
    let count = symmetric_sum(ih.n(), b, |x| Ok(ih.system(x, b, strict)?.count()))?;
    Ok(CountReport::plain(count, b, strictness))
}

/// Pairs with `|x|, |y| <= B` and `H_c(x) y = 0` exactly.
pub fn count_aux_eq<S: Scalar>(c: &CubicForm<S>, b: i64) -> Result<CountReport> {
    check_radius(b)?;
    let ih = IntegerHessian::new(c)?;
    let count = symmetric_sum(ih.n(), b, |x| Ok(ih.kernel_system(x, b)?.count()))?;
    Ok(CountReport::plain(count, b, Strictness::Strict))
}

/// `N^aux_c(B)` split by the dyadic class of `x`.
pub fn count_aux_by_class<S: Scalar>(
    c: &CubicForm<S>,
    b: i64,
    strictness: Strictness,
) -> Result<CountReport> {
    check_radius(b)?;
    let ih = IntegerHessian::new(c)?;
    let n = ih.n();
    let strict = strictness.is_strict();
    let total = box_size(n, b)?;
    type Acc = BTreeMap<DyadicClass, (u64, u64)>;
    let table: Acc = (0..total)
        .into_par_iter()
        .try_fold(Acc::new, |mut acc, idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            let class = SpectrumOracle::new(n, ih.matrix(&x), ih.scale()).classify();
            let pairs = ih.system(&x, b, strict)?.count();
            let e = acc.entry(class).or_insert((0, 0));
            e.0 += 1;
            e.1 += pairs;
            Ok::<_, Error>(acc)
        })
        .try_reduce(Acc::new, |mut a, other| {
            for (k, (p, q)) in other {
                let e = a.entry(k).or_insert((0, 0));
                e.0 += p;
                e.1 += q;
            }
            Ok(a)
        })?;
    let breakdown: Vec<ClassCount> = table
        .into_iter()
        .map(|(class, (points, pairs))| ClassCount {
            label: class.to_string(),
            class,
            points,
            pairs,
        })
        .collect();
    let count = breakdown.iter().map(|c| c.pairs).sum();
    Ok(CountReport {
        count,
        b,
        strictness,
        breakdown: Some(breakdown),
    })
}

/// Both sides of the partition of `N^aux` by dyadic classes.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub b: i64,
    pub strictness: Strictness,
    /// exhaustive pair enumeration
    pub lhs: u64,
    /// sum over classes of pruned `N_H` counts
    pub rhs: u64,
    pub equal: bool,
    pub classes: Vec<ClassCount>,
}

pub fn partition_check<S: Scalar>(c: &CubicForm<S>, b: i64, strictness: Strictness) -> Result<PartitionReport> {
    check_radius(b)?;
    let ih = IntegerHessian::new(c)?;
    let strict = strictness.is_strict();
    let total = box_size(ih.n(), b)?;
    let n = ih.n();
    let lhs = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            Ok(ih.system(&x, b, strict)?.count_brute())
        })
        .try_reduce(|| 0, |a, b| Ok::<_, Error>(a + b))?;
    let by_class = count_aux_by_class(c, b, strictness)?;
    let classes = by_class.breakdown.unwrap_or_default();
    let rhs = classes.iter().map(|c| c.pairs).sum();
    Ok(PartitionReport {
        b,
        strictness,
        lhs,
        rhs,
        equal: lhs == rhs,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::matrix::Matrix;
    use crate::scalar::{int, Rational};

    fn x_cubed() -> CubicForm<Rational> {
        CubicForm::diagonal(&[int(1)]).unwrap()
    }

    fn sym(rows: Vec<Vec<i64>>) -> SymMatrix<Rational> {
        SymMatrix::new(Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect()).unwrap())
            .unwrap()
    }

    /// Direct pair enumeration, independent of the pruned counter.
    fn oracle_aux(c: &CubicForm<Rational>, b: i64, strict: bool) -> u64 {
        let cf = c.to_float();
        let norm = cf.sup_norm().unwrap();
        let n = c.n();
        let side = (2 * b + 1) as usize;
        let pts: Vec<Vec<i64>> = (0..side.pow(n as u32))
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let v = (idx % side) as i64 - b;
                        idx /= side;
                        v
                    })
                    .collect()
            })
            .collect();
        let mut count = 0;
        for x in &pts {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let m = cf.second_derivatives(&xf).unwrap();
            for y in &pts {
                let ok = (0..n).all(|i| {
                    // second derivatives are integers here, so compare exactly
                    let s: f64 = (0..n).map(|j| m[(i, j)] * y[j] as f64).sum();
                    if strict {
                        s.abs() < b as f64 * norm
                    } else {
                        s.abs() <= b as f64 * norm
                    }
                });
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn count_nh_examples() {
        assert_eq!(count_nh(&sym(vec![vec![6, 0], vec![0, 6]]), 1, Strictness::Weak).unwrap().count, 1);
        assert_eq!(count_nh(&sym(vec![vec![0, 0], vec![0, 0]]), 2, Strictness::Weak).unwrap().count, 25);
        // y_1 is already confined by |y_1| <= 3, so the whole 7 x 7 box counts
        assert_eq!(count_nh(&sym(vec![vec![1, 0], vec![0, 0]]), 3, Strictness::Weak).unwrap().count, 49);
    }

    #[test]
    fn count_aux_examples() {
        assert_eq!(count_aux(&x_cubed(), 2, Strictness::Strict).unwrap().count, 9);
        let f = fermat::<Rational>(2);
        assert_eq!(
            count_aux(&f, 2, Strictness::Strict).unwrap().count,
            oracle_aux(&f, 2, true)
        );
        assert_eq!(count_aux(&f, 2, Strictness::Strict).unwrap().count, 81);
        for c in [fermat::<Rational>(2), fermat::<Rational>(3)] {
            // x = 0 contributes the whole 3^n box at B = 1; no other x does
            let n = c.n() as u32;
            assert!(count_aux(&c, 1, Strictness::Strict).unwrap().count >= 3u64.pow(n));
        }
    }

    #[test]
    fn count_aux_eq_examples() {
        assert_eq!(count_aux_eq(&x_cubed(), 2).unwrap().count, 9);
        assert_eq!(count_aux_eq(&fermat::<Rational>(2), 1).unwrap().count, 25);
        let f = fermat::<Rational>(2);
        assert!(count_aux_eq(&f, 3).unwrap().count <= count_aux(&f, 3, Strictness::Weak).unwrap().count);
    }

    #[test]
    fn partition_examples() {
        let r = partition_check(&x_cubed(), 2, Strictness::Strict).unwrap();
        assert_eq!((r.lhs, r.rhs), (9, 9));
        assert!(partition_check(&fermat::<Rational>(2), 3, Strictness::Strict).unwrap().equal);
        assert!(partition_check(&fermat::<Rational>(2), 3, Strictness::Weak).unwrap().equal);
        assert_eq!(
            partition_check(&CubicForm::<Rational>::zero(2).unwrap(), 2, Strictness::Strict).unwrap_err(),
            Error::ZeroForm
        );
    }

    #[test]
    fn rejects_radius_below_one() {
        assert!(count_aux(&x_cubed(), 0, Strictness::Strict).is_err());
    }
}
