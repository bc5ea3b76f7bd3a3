use rayon::prelude::*;
use serde::Serialize;

use super::aux::count_aux_by_class;
use super::dyadic::{DyadicClass, SpectrumOracle};
use super::enumerate::{box_size, decode, IntegerHessian};
use super::{ClassCount, Strictness};
use crate::error::Result;
use crate::forms::CubicForm;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PigeonholeBranch {
    HSmall,
    Prescribed { k: usize, exponents: Vec<i32> },
    AllPrescribed { exponents: Vec<i32> },
}

/// The class carrying the largest share of `N^aux`, with the inequality
/// `2^{e_1 + .. + e_k} N^aux / (B^n L^n) <= kappa_theory * #K` checked.
///
/// `L = 1 + log2 B`. With `M` non-empty classes the largest one carries at
/// least `N^aux / M` pairs, and each of its points contributes at most
/// `(2B+1)^n` (for `K_0(1)`) or, by the ellipsoid bound with
/// `C = 6n^2 >= Lambda_1 / B`, at most `2((2+C) sqrt n)^n 2^k B^n / 2^{e_1+..+e_k}`.
#[derive(Debug, Clone, Serialize)]
pub struct PigeonholeReport {
    pub b: i64,
    pub strictness: Strictness,
    pub n_aux: u64,
    pub log_factor: f64,
    pub branch: PigeonholeBranch,
    pub class: DyadicClass,
    pub class_pairs: u64,
    /// `#K` on the right of the inequality (for the all-prescribed branch
    /// the enlarged class `K_{n-1}(2^{e_1}, .., 2^{e_n})`)
    pub class_points: u64,
    pub admissible_classes: usize,
    pub lhs: f64,
    pub kappa_measured: f64,
    pub kappa_theory: f64,
    pub verified: bool,
    pub table: Vec<ClassCount>,
}

pub fn pigeonhole<S: Scalar>(c: &CubicForm<S>, b: i64, strictness: Strictness) -> Result<PigeonholeReport> {
    let by_class = count_aux_by_class(c, b, strictness)?;
    let table = by_class.breakdown.unwrap_or_default();
    let n = c.n();
    let n_aux = by_class.count;
    // first maximum in class order
    let winner = table
        .iter()
        .fold(None::<&ClassCount>, |best, row| match best {
            Some(b) if b.pairs >= row.pairs => Some(b),
            _ => Some(row),
        })
        .expect("the box is never empty");
    let class = winner.class.clone();
    let k = class.k();
    let admissible = table.iter().filter(|r| r.pairs > 0).count().max(1);
    let log_factor = 1.0 + (b as f64).log2();
    let nf = n as f64;
    let (branch, class_points) = if k == 0 {
        (PigeonholeBranch::HSmall, winner.points)
    } else if k < n {
        (
            PigeonholeBranch::Prescribed {
                k,
                exponents: class.exponents.clone(),
            },
            winner.points,
        )
    } else {
        let enlarged = DyadicClass {
            exponents: class.exponents[..n - 1].to_vec(),
            tail_exponent: class.exponents[n - 1],
        };
        (
            PigeonholeBranch::AllPrescribed {
                exponents: class.exponents.clone(),
            },
            count_class_points(c, b, &enlarged)?,
        )
    };
    let per_point = if k == 0 {
        3f64.powi(n as i32)
    } else {
        let cn = 6.0 * nf * nf;
        2.0 * ((2.0 + cn) * nf.sqrt()).powi(n as i32) * 2f64.powi(k as i32)
    };
    let kappa_theory = admissible as f64 * per_point / log_factor.powi(n as i32);
    let lhs = 2f64.powi(class.exponent_sum() as i32) * n_aux as f64
        / ((b as f64).powi(n as i32) * log_factor.powi(n as i32));
    let kappa_measured = lhs / class_points as f64;
    Ok(PigeonholeReport {
        b,
        strictness,
        n_aux,
        log_factor,
        branch,
        class,
        class_pairs: winner.pairs,
        class_points,
        admissible_classes: admissible,
        lhs,
        kappa_measured,
        kappa_theory,
        verified: class_points > 0 && lhs <= kappa_theory * class_points as f64,
        table,
    })
}

/// Lattice points of the box in a (not necessarily canonical) class.
pub fn count_class_points<S: Scalar>(c: &CubicForm<S>, b: i64, class: &DyadicClass) -> Result<u64> {
    let ih = IntegerHessian::new(c)?;
    let n = ih.n();
    Ok((0..box_size(n, b)?)
        .into_par_iter()
        .filter(|&idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            class.contains(&SpectrumOracle::new(n, ih.matrix(&x), ih.scale()))
        })
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::class_histogram;
    use crate::forms::fermat;
    use crate::scalar::{int, rat, Rational};

    #[test]
    fn x_cubed_branch_verified() {
        let c = CubicForm::diagonal(&[int(1)]).unwrap();
        let r = pigeonhole(&c, 4, Strictness::Strict).unwrap();
        assert!(r.verified);
        assert_eq!(r.table.iter().map(|t| t.pairs).sum::<u64>(), r.n_aux);
    }

    #[test]
    fn fermat_table_matches_histogram() {
        let f = fermat::<Rational>(2);
        let r = pigeonhole(&f, 8, Strictness::Strict).unwrap();
        assert!(r.verified);
        let hist = class_histogram(&f, 8).unwrap();
        assert_eq!(r.table.len(), hist.len());
        for row in &r.table {
            assert_eq!(hist[&row.class], row.points);
        }
    }

    #[test]
    fn scale_does_not_change_the_branch() {
        // the normalised Hessian ignores the overall scale
        let tiny = CubicForm::diagonal(&[rat(1, 1000), rat(1, 1000)]).unwrap();
        let f = fermat::<Rational>(2);
        let a = pigeonhole(&tiny, 4, Strictness::Strict).unwrap();
        let b = pigeonhole(&f, 4, Strictness::Strict).unwrap();
        assert_eq!(a.branch, b.branch);
    }

    #[test]
    fn h_small_wins_at_unit_radius() {
        let c = CubicForm::new(1, [([0, 0, 0], int(1))]).unwrap();
        let r = pigeonhole(&c, 1, Strictness::Strict).unwrap();
        // x = 0 carries 3 pairs, x = +-1 carry 1 each
        assert_eq!(r.n_aux, 5);
        assert_eq!(r.branch, PigeonholeBranch::HSmall);
        assert!(r.verified);
    }
}
