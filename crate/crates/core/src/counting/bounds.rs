use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::SymMatrix;
use crate::minors::abs_eigenvalues;
use crate::scalar::Scalar;

/// Upper bounds for `N_H(B)` (weak inequalities).
///
/// In the eigenbasis of `H` every solution satisfies
/// `|z_i| <= s_i = min(sqrt(n) B / Lambda_i, sqrt(n) B)`; unit cubes around
/// the lattice points are disjoint and lie in the box enlarged by
/// `sqrt(n)/2` in each direction, which gives `product`. `prefix` is the
/// weaker shape `2 ((2 + C) sqrt(n))^n B^n / (1 + Lambda_1 ... Lambda_i)`
/// minimised over `i`, with `C = max(1, Lambda_1 / B)`.
#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidBound {
    pub product: f64,
    pub box_bound: f64,
    pub prefix: f64,
    pub c: f64,
    pub bound: u64,
}

const ROUNDING: f64 = 1e-9;

pub fn ellipsoid_bound<S: Scalar>(h: &SymMatrix<S>, b: f64) -> Result<EllipsoidBound> {
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::OutOfRange(format!("B = {b} must be at least 1")));
    }
    let n = h.n();
    let nf = n as f64;
    let root_n = nf.sqrt();
    let lambdas = abs_eigenvalues(&h.matrix().to_f64())?;
    let product = lambdas
        .iter()
        .map(|&l| {
            // shrink the eigenvalue slightly so rounding cannot tighten the box
            let l = l * (1.0 - ROUNDING);
            let s = if l > 0.0 { (root_n * b / l).min(root_n * b) } else { root_n * b };
            2.0 * s + root_n
        })
        .product::<f64>();
    let box_bound = (2.0 * b.floor() + 1.0).powi(n as i32);
    let c = (lambdas.first().copied().unwrap_or(0.0) / b).max(1.0);
    let lead = 2.0 * ((2.0 + c) * root_n).powi(n as i32) * b.powi(n as i32);
    let mut running = 1.0;
    let mut prefix = f64::INFINITY;
    for &l in &lambdas {
        running *= l * (1.0 - ROUNDING);
        prefix = prefix.min(lead / (1.0 + running));
    }
    let best = product.min(box_bound).min(prefix);
    let bound = (best * (1.0 + ROUNDING)).floor() as u64;
    Ok(EllipsoidBound {
        product,
        box_bound,
        prefix,
        c,
        bound,
    })
}
