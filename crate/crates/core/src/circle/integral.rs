use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::DiagonalSystem;
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.01;
/// Samples per RNG stream; streams are independent of the thread count.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Serialize)]
pub struct IntegralReport {
    pub epsilon: f64,
    pub samples: u64,
    pub seed: u64,
    /// `(4 J(eps/2) - J(eps)) / 3`
    pub estimate: f64,
    pub stderr: f64,
    pub at_epsilon: f64,
    pub at_epsilon_stderr: f64,
    pub at_half: f64,
    pub at_half_stderr: f64,
    /// `J(eps/2)` and `J(eps)` differ by more than sampling noise allows
    pub degenerate: bool,
}

/// Mean and standard error of a variable taking value `v` on `count` of
/// `n` samples, `w` on `other` samples and 0 elsewhere.
fn moments(n: f64, terms: &[(f64, u64)]) -> (f64, f64) {
    let mean = terms.iter().map(|&(v, c)| v * c as f64).sum::<f64>() / n;
    let second = terms.iter().map(|&(v, c)| v * v * c as f64).sum::<f64>() / n;
    (mean, ((second - mean * mean).max(0.0) / n).sqrt())
}

/// Monte Carlo for `(2 eps)^{-R} vol{x in box : |c_i(x)| < eps for all i}`
/// at `eps` and `eps / 2` on the same samples, with the Richardson
/// combination as the estimate.
pub fn singular_integral_estimate(
    system: &DiagonalSystem,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<IntegralReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} must be positive")));
    }
    if samples < 2 {
        return Err(Error::OutOfRange("need at least two samples".into()));
    }
    let r = system.r();
    if r > 2 {
        return Err(Error::OutOfRange(format!("{r} forms; at most 2 are supported")));
    }
    let bounds = system.bounds();
    let n = system.n();
    let chunks = samples.div_ceil(CHUNK);
    let half = epsilon / 2.0;
    // (hits at eps, hits at eps/2); the second set is inside the first
    let (wide, narrow) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0; n];
            let (mut wide, mut narrow) = (0u64, 0u64);
            for _ in 0..len {
                for (xi, &(lo, hi)) in x.iter_mut().zip(&bounds) {
                    *xi = lo + (hi - lo) * rng.random::<f64>();
                }
                let worst = (0..r).map(|i| system.eval_f64(i, &x).abs()).fold(0.0, f64::max);
                if worst < epsilon {
                    wide += 1;
                    if worst < half {
                        narrow += 1;
                    }
                }
            }
            (wide, narrow)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let vol = system.volume();
    let a = vol / (2.0 * half).powi(r as i32);
    let b = vol / (2.0 * epsilon).powi(r as i32);
    let only_wide = wide - narrow;
    let (at_epsilon, at_epsilon_stderr) = moments(nf, &[(b, wide)]);
    let (at_half, at_half_stderr) = moments(nf, &[(a, narrow)]);
    let (estimate, stderr) = moments(nf, &[((4.0 * a - b) / 3.0, narrow), (-b / 3.0, only_wide)]);
    let (diff, diff_err) = moments(nf, &[(a - b, narrow), (-b, only_wide)]);
    let degenerate = narrow == 0
        || (diff.abs() > 4.0 * diff_err && diff.abs() > 0.05 * at_epsilon.max(at_half));
    Ok(IntegralReport {
        epsilon,
        samples,
        seed,
        estimate,
        stderr,
        at_epsilon,
        at_epsilon_stderr,
        at_half,
        at_half_stderr,
        degenerate,
    })
}
