use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::DiagonalSystem;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Largest modulus `p^k` used for a local density.
pub const MAX_MODULUS: u64 = 512;
/// Cap on the size of the joint residue table times the modulus.
const TABLE_LIMIT: u128 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    /// largest `k` with `p^k <= 512`
    Auto,
    /// `min(k, auto)`
    Fixed(u32),
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut sieve = vec![true; limit + 1];
    let mut out = Vec::new();
    for p in 2..=limit {
        if sieve[p] {
            out.push(p as u64);
            for m in (p * p..=limit).step_by(p) {
                sieve[m] = false;
            }
        }
    }
    out
}

fn auto_depth(p: u64) -> u32 {
    let mut k = 0;
    let mut q = 1u64;
    while q * p <= MAX_MODULUS {
        q *= p;
        k += 1;
    }
    k
}

/// Solutions mod `p^k`: all of them, and those with `x = 0 mod p`.
fn residue_counts(system: &DiagonalSystem, p: u64, k: u32) -> Result<(u128, u128)> {
    let q = p
        .checked_pow(k)
        .filter(|&q| q <= MAX_MODULUS)
        .ok_or(Error::DepthTooLarge(p.saturating_pow(k)))?;
    let r = system.r();
    let cells = (q as u128)
        .checked_pow(r as u32)
        .filter(|&c| c * q as u128 <= TABLE_LIMIT)
        .ok_or_else(|| Error::OutOfRange(format!("{r} forms at modulus {q}")))? as usize;
    let all = convolve(system, q, cells, 1)?;
    let imprimitive = convolve(system, q, cells, p as i64)?;
    Ok((all, imprimitive))
}

/// Number of `x mod q` with every coordinate a multiple of `step` and all
/// forms vanishing, by convolving the residue distributions of `a_ij t^3`
/// one variable at a time.
fn convolve(system: &DiagonalSystem, q: u64, cells: usize, step: i64) -> Result<u128> {
    let r = system.r();
    let qi = q as i64;
    let mut dist = vec![0u128; cells];
    dist[0] = 1;
    for j in 0..system.n() {
        // multiplicity of each joint residue of (a_1j t^3, .., a_Rj t^3)
        let mut steps: Vec<(usize, u128)> = Vec::new();
        for t in (0..qi).step_by(step as usize) {
            let cube = (t * t % qi) * t % qi;
            let idx = (0..r).rev().fold(0usize, |acc, i| {
                acc * q as usize + (system.coeffs()[i][j] * cube).rem_euclid(qi) as usize
            });
            match steps.iter_mut().find(|(v, _)| *v == idx) {
                Some((_, m)) => *m += 1,
                None => steps.push((idx, 1)),
            }
        }
        let mut next = vec![0u128; cells];
        for (s, &count) in dist.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &(v, m) in &steps {
                let target = add_residues(s, v, q as usize, r);
                next[target] = count
                    .checked_mul(m)
                    .and_then(|c| next[target].checked_add(c))
                    .ok_or_else(|| Error::Overflow("residue count".into()))?;
            }
        }
        dist = next;
    }
    Ok(dist[0])
}

fn normalised(system: &DiagonalSystem, q: u64, count: u128) -> Rational {
    let solutions = Rational::from_integer(BigInt::from(count));
    let qq = Rational::from_integer(BigInt::from(q));
    let e = system.n() as i32 - system.r() as i32;
    if e >= 0 {
        solutions / num_traits::pow(qq, e as usize)
    } else {
        solutions * num_traits::pow(qq, (-e) as usize)
    }
}

/// `#{x mod p^k : c_i(x) = 0 mod p^k for all i} / p^{k(n-R)}`.
pub fn local_density(system: &DiagonalSystem, p: u64, k: u32) -> Result<Rational> {
    if p < 2 {
        return Err(Error::OutOfRange(format!("p = {p} is not a prime")));
    }
    if k == 0 {
        return Ok(Rational::one());
    }
    let (all, _) = residue_counts(system, p, k)?;
    Ok(normalised(system, p.pow(k), all))
}

/// Componentwise sum of two packed residue vectors.
fn add_residues(a: usize, b: usize, q: usize, r: usize) -> usize {
    let (mut a, mut b) = (a, b);
    let mut out = 0;
    let mut place = 1;
    for _ in 0..r {
        out += ((a % q + b % q) % q) * place;
        a /= q;
        b /= q;
        place *= q;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalFactor {
    pub p: u64,
    pub k: u32,
    pub modulus: u64,
    /// `sigma_{p,k}`
    pub density: f64,
    pub exact: String,
    /// some solution mod `p^k` has a coordinate prime to `p`
    pub primitive: bool,
    /// factor used in the product: `density`, or 0 without primitive
    /// solutions (every p-adic zero is then 0 and `sigma_p = 0`)
    pub factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub cutoff: u64,
    pub factors: Vec<LocalFactor>,
    pub partial_products: Vec<f64>,
    pub estimate: f64,
    /// some prime has no solution mod `p^k` outside `p Z^n`
    pub hasse_obstruction: bool,
}

/// `prod_{p <= cutoff} sigma_{p, k_p}`.
pub fn singular_series_estimate(system: &DiagonalSystem, cutoff: u64, depth: Depth) -> Result<SeriesReport> {
    if cutoff > MAX_MODULUS {
        return Err(Error::OutOfRange(format!("prime cutoff {cutoff} exceeds {MAX_MODULUS}")));
    }
    let mut factors = Vec::new();
    let mut partial_products = Vec::new();
    let mut product = 1.0;
    for p in primes_up_to(cutoff) {
        let k = match depth {
            Depth::Auto => auto_depth(p),
            Depth::Fixed(k) => k.min(auto_depth(p)),
        };
        let (density, primitive) = if k == 0 {
            (Rational::one(), true)
        } else {
            let (all, imprimitive) = residue_counts(system, p, k)?;
            (normalised(system, p.pow(k), all), all > imprimitive)
        };
        let factor = if primitive { density.as_f64() } else { 0.0 };
        product *= factor;
        partial_products.push(product);
        factors.push(LocalFactor {
            p,
            k,
            modulus: p.pow(k),
            density: density.as_f64(),
            exact: density.to_string(),
            primitive,
            factor,
        });
    }
    Ok(SeriesReport {
        cutoff,
        hasse_obstruction: factors.iter().any(|f| !f.primitive),
        factors,
        partial_products,
        estimate: if product.is_finite() { product } else { 0.0 },
    })
}

impl SeriesReport {
    /// Largest `|log sigma_p|` over the last `count` primes.
    pub fn tail_deviation(&self, count: usize) -> f64 {
        self.factors
            .iter()
            .rev()
            .take(count)
            .map(|f| f.factor.ln().abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    /// Direct residue scan.
    fn scan(coeffs: &[Vec<i64>], p: u64, k: u32) -> Rational {
        let q = p.pow(k) as i64;
        let n = coeffs[0].len();
        let mut count = 0i64;
        let total = (q as u64).pow(n as u32);
        for mut idx in 0..total {
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let v = (idx % q as u64) as i64;
                    idx /= q as u64;
                    v
                })
                .collect();
            if coeffs
                .iter()
                .all(|row| row.iter().zip(&x).map(|(a, v)| a * v * v * v).sum::<i64>().rem_euclid(q) == 0)
            {
                count += 1;
            }
        }
        let e = n as i32 - coeffs.len() as i32;
        Rational::from_i64(count) / num_traits::pow(Rational::from_i64(q), e as usize)
    }

    #[test]
    fn single_cube_mod_seven() {
        let s = DiagonalSystem::unit_box(vec![vec![1]]).unwrap();
        assert_eq!(local_density(&s, 7, 1).unwrap(), int(1));
        assert_eq!(local_density(&s, 7, 0).unwrap(), int(1));
    }

    #[test]
    fn matches_residue_scan() {
        let fermat4 = vec![vec![1, 1, -1, -1]];
        let s = DiagonalSystem::unit_box(fermat4.clone()).unwrap();
        let v = local_density(&s, 2, 1).unwrap();
        assert_eq!(v, scan(&fermat4, 2, 1));
        assert_eq!(v, rat(1, 1));
        for (p, k) in [(3, 2), (7, 1), (2, 3), (5, 1)] {
            assert_eq!(local_density(&s, p, k).unwrap(), scan(&fermat4, p, k), "p = {p}, k = {k}");
        }
        let pair = vec![vec![1, 2, -1, 0], vec![0, 1, 1, -3]];
        let s = DiagonalSystem::unit_box(pair.clone()).unwrap();
        for (p, k) in [(2, 2), (3, 1), (7, 1)] {
            assert_eq!(local_density(&s, p, k).unwrap(), scan(&pair, p, k));
        }
    }

    #[test]
    fn depth_is_capped() {
        let s = DiagonalSystem::unit_box(vec![vec![1, 1]]).unwrap();
        assert_eq!(local_density(&s, 2, 10).unwrap_err(), Error::DepthTooLarge(1024));
    }

    #[test]
    fn obstruction_at_three() {
        // x^3 + 3 y^3 + 9 z^3 = 0 mod 27 forces 3 | x, y, z
        let s = DiagonalSystem::unit_box(vec![vec![1, 3, 9]]).unwrap();
        let r = singular_series_estimate(&s, 5, Depth::Auto).unwrap();
        assert!(r.hasse_obstruction);
        assert_eq!(r.estimate, 0.0);
        assert!(!r.factors[1].primitive);
        assert!(r.factors[1].density > 0.0);
        assert!(r.factors[0].primitive);
    }

    #[test]
    fn trivial_factors_give_one() {
        // a single variable with unit coefficient: only x = 0 mod p^k, and
        // p^{k(n-1)} = 1
        let s = DiagonalSystem::unit_box(vec![vec![1]]).unwrap();
        let r = singular_series_estimate(&s, 13, Depth::Fixed(0)).unwrap();
        assert_eq!(r.estimate, 1.0);
    }

    #[test]
    fn primes() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
