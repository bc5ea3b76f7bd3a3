use rayon::prelude::*;

use super::DiagonalSystem;
use crate::error::{Error, Result};

/// Largest box handled by the brute-force counter.
const BRUTE_LIMIT: u128 = 1 << 34;

fn cube_terms(system: &DiagonalSystem, form: usize, vars: &[usize], p: i64) -> Vec<Vec<i64>> {
    vars.iter()
        .map(|&j| {
            let (lo, hi) = system.integer_range(j, p);
            let a = system.coeffs()[form][j];
            (lo..=hi).map(|x| a * x * x * x).collect()
        })
        .collect()
}

/// Every sum `t_1 + .. + t_k` with `t_i` drawn from `terms[i]`.
fn partial_sums(terms: &[Vec<i64>]) -> Vec<i64> {
    let mut sums = vec![0i64];
    for t in terms {
        let mut next = Vec::with_capacity(sums.len() * t.len());
        for &s in &sums {
            next.extend(t.iter().map(|&v| s + v));
        }
        sums = next;
    }
    sums
}

/// `#{x : x / P in box, c(x) = 0}`. One form: the sorted partial sums of
/// the first half of the variables are matched against the negated sums of
/// the second half. Several forms: exhaustive scan.
pub fn count_zeros_box(system: &DiagonalSystem, p: i64) -> Result<u64> {
    if p < 1 {
        return Err(Error::OutOfRange(format!("P = {p} must be at least 1")));
    }
    if system.r() != 1 {
        return count_zeros_brute(system, p);
    }
    let n = system.n();
    // |a x^3| summed over n variables must fit in i64
    let bound = system.coeffs()[0]
        .iter()
        .map(|&a| a.unsigned_abs() as u128 * (p as u128).pow(3))
        .sum::<u128>();
    if bound >= i64::MAX as u128 {
        return Err(Error::Overflow(format!("partial sums at P = {p}")));
    }
    let half = n.div_ceil(2);
    let first: Vec<usize> = (0..half).collect();
    let second: Vec<usize> = (half..n).collect();
    let mut left = partial_sums(&cube_terms(system, 0, &first, p));
    let mut right: Vec<i64> = partial_sums(&cube_terms(system, 0, &second, p))
        .into_iter()
        .map(|v| -v)
        .collect();
    left.par_sort_unstable();
    right.par_sort_unstable();
    let (mut i, mut j, mut count) = (0usize, 0usize, 0u64);
    while i < left.len() && j < right.len() {
        match left[i].cmp(&right[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let v = left[i];
                let i0 = i;
                while i < left.len() && left[i] == v {
                    i += 1;
                }
                let j0 = j;
                while j < right.len() && right[j] == v {
                    j += 1;
                }
                count += ((i - i0) * (j - j0)) as u64;
            }
        }
    }
    Ok(count)
}

/// Exhaustive count, any number of forms.
pub fn count_zeros_brute(system: &DiagonalSystem, p: i64) -> Result<u64> {
    if p < 1 {
        return Err(Error::OutOfRange(format!("P = {p} must be at least 1")));
    }
    let n = system.n();
    let ranges: Vec<(i64, i64)> = (0..n).map(|j| system.integer_range(j, p)).collect();
    let sizes: Vec<u64> = ranges.iter().map(|&(lo, hi)| (hi - lo + 1).max(0) as u64).collect();
    let total = sizes.iter().map(|&s| s as u128).product::<u128>();
    if total > BRUTE_LIMIT {
        return Err(Error::OutOfRange(format!("{total} points is too many to scan")));
    }
    if total == 0 {
        return Ok(0);
    }
    let coeffs = system.coeffs();
    Ok((0..total as u64)
        .into_par_iter()
        .filter(|&idx| {
            let mut rest = idx;
            let mut x = Vec::with_capacity(n);
            for (j, &s) in sizes.iter().enumerate() {
                x.push(ranges[j].0 + (rest % s) as i64);
                rest /= s;
            }
            coeffs.iter().all(|row| {
                row.iter()
                    .zip(&x)
                    .map(|(&a, &v)| a as i128 * (v as i128).pow(3))
                    .sum::<i128>()
                    == 0
            })
        })
        .count() as u64)
}
