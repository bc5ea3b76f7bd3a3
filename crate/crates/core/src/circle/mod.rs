//! Exact zero counts for diagonal cubic systems in expanding boxes and the
//! two local factors of the Hardy–Littlewood prediction
//! `N(P) ~ S J P^{n - 3R}`.
//!
//! `S` is taken to be the product of the local densities
//! `sigma_p = lim #{x mod p^k : c(x) = 0} / p^{k(n-R)}` and `J` the real
//! density `lim (2 eps)^{-R} vol{x in box : |c_i(x)| < eps}`, both in their
//! standard forms.

mod count;
mod integral;
mod series;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::scalar::{approximate_rational, Rational, Scalar};

pub use count::{count_zeros_box, count_zeros_brute};
pub use integral::{singular_integral_estimate, IntegralReport, DEFAULT_EPSILON};
pub use series::{local_density, primes_up_to, singular_series_estimate, Depth, LocalFactor, SeriesReport, MAX_MODULUS};

/// `R` diagonal cubic forms `c_i = sum_j a_ij x_j^3` and a box in
/// `[-1, 1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSystem {
    n: usize,
    coeffs: Vec<Vec<i64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(skip)]
    lower_q: Vec<Rational>,
    #[serde(skip)]
    upper_q: Vec<Rational>,
}

impl DiagonalSystem {
    pub fn new(coeffs: Vec<Vec<i64>>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let n = bounds.len();
        if n == 0 || coeffs.is_empty() {
            return Err(Error::Invalid("need at least one form and one variable".into()));
        }
        for (i, row) in coeffs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().all(|&a| a == 0) {
                return Err(Error::Invalid(format!("form {i} is zero")));
            }
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite);
            }
            if !(-1.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::OutOfRange(format!("interval [{lo}, {hi}] is not inside [-1, 1]")));
            }
        }
        // decimal endpoints such as 0.3 are meant exactly
        let snap = |v: f64| approximate_rational(v, 1_000_000);
        Ok(DiagonalSystem {
            n,
            lower_q: bounds.iter().map(|b| snap(b.0)).collect(),
            upper_q: bounds.iter().map(|b| snap(b.1)).collect(),
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            coeffs,
        })
    }

    /// The box `[-1, 1]^n`.
    pub fn unit_box(coeffs: Vec<Vec<i64>>) -> Result<Self> {
        let n = coeffs.first().map_or(0, Vec::len);
        Self::new(coeffs, vec![(-1.0, 1.0); n])
    }

    /// Integer diagonal forms on `[-1, 1]^n`.
    pub fn from_forms<S: Scalar>(forms: &[CubicForm<S>]) -> Result<Self> {
        let coeffs = forms
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.diagonal_coefficients()
                    .ok_or(Error::NonDiagonal(i))?
                    .iter()
                    .map(|a| {
                        let q = a.to_exact().ok_or(Error::NonFinite)?;
                        if !q.is_integer() {
                            return Err(Error::Invalid(format!("form {i} has a non-integer coefficient {q}")));
                        }
                        i64::try_from(q.to_integer()).map_err(|_| Error::Overflow("coefficient".into()))
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        Self::unit_box(coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of forms.
    pub fn r(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lower.iter().copied().zip(self.upper.iter().copied()).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    /// Integer range of `x_j` with `x_j / P` in the box.
    pub fn integer_range(&self, j: usize, p: i64) -> (i64, i64) {
        let pq = Rational::from_i64(p);
        let lo = (&self.lower_q[j] * &pq).ceil().to_integer();
        let hi = (&self.upper_q[j] * &pq).floor().to_integer();
        (
            i64::try_from(lo).expect("|x| <= P"),
            i64::try_from(hi).expect("|x| <= P"),
        )
    }

    /// `c_i(x)` at a real point.
    pub fn eval_f64(&self, i: usize, x: &[f64]) -> f64 {
        self.coeffs[i].iter().zip(x).map(|(&a, &v)| a as f64 * v * v * v).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub p: i64,
    pub count: u64,
    pub series: f64,
    pub integral: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// `N(P) / (S J P^{n-3R})` for each `P`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub n: usize,
    pub r: usize,
    pub exponent: i32,
    pub cutoff: u64,
    pub series: SeriesReport,
    pub integral: IntegralReport,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReportParams {
    pub cutoff: u64,
    pub depth: Depth,
    pub epsilon: f64,
    pub samples: u64,
    pub seed: u64,
}

pub fn convergence_report(system: &DiagonalSystem, ps: &[i64], params: ReportParams) -> Result<AsymptoticReport> {
    if system.r() != 1 {
        return Err(Error::OutOfRange("the report needs a single form".into()));
    }
    if system.n() < 4 {
        return Err(Error::OutOfRange(format!(
            "the main term P^(n-3) needs n >= 4, got n = {}",
            system.n()
        )));
    }
    let series = singular_series_estimate(system, params.cutoff, params.depth)?;
    let integral = singular_integral_estimate(system, params.epsilon, params.samples, params.seed)?;
    let main = series.estimate * integral.estimate;
    if !(main > 0.0) {
        return Err(Error::ZeroPrediction);
    }
    let exponent = system.n() as i32 - 3 * system.r() as i32;
    let rows = ps
        .iter()
        .map(|&p| {
            let count = count_zeros_box(system, p)?;
            let predicted = main * (p as f64).powi(exponent);
            Ok(ReportRow {
                p,
                count,
                series: series.estimate,
                integral: integral.estimate,
                predicted,
                ratio: count as f64 / predicted,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AsymptoticReport {
        n: system.n(),
        r: system.r(),
        exponent,
        cutoff: params.cutoff,
        series,
        integral,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn integer_ranges_follow_the_box() {
        let s = DiagonalSystem::new(vec![vec![1, 1]], vec![(-1.0, 1.0), (0.3, 0.5)]).unwrap();
        assert_eq!(s.integer_range(0, 5), (-5, 5));
        assert_eq!(s.integer_range(1, 10), (3, 5));
        assert_eq!(s.integer_range(1, 3), (1, 1));
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(DiagonalSystem::new(vec![vec![0, 0]], vec![(-1.0, 1.0); 2]).is_err());
        assert!(DiagonalSystem::new(vec![vec![1, 1]], vec![(-2.0, 1.0); 2]).is_err());
        let c = CubicForm::new(2, [([0, 0, 1], int(1))]).unwrap();
        assert_eq!(DiagonalSystem::from_forms(&[c]).unwrap_err(), Error::NonDiagonal(0));
    }

    #[test]
    fn report_needs_four_variables() {
        let s = DiagonalSystem::unit_box(vec![vec![1, -1]]).unwrap();
        let params = ReportParams {
            cutoff: 10,
            depth: Depth::Auto,
            epsilon: DEFAULT_EPSILON,
            samples: 1000,
            seed: 1,
        };
        assert!(matches!(convergence_report(&s, &[4], params), Err(Error::OutOfRange(_))));
    }
}
