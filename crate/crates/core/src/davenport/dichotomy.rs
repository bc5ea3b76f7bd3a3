use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{build_y_basis, singular::exact_form, trilinear_kappa, EIGENVALUE_TOLERANCE};
use crate::counting::{
    pigeonhole, trichotomy, CoverWitness, DyadicClass, FailureWitness, Strictness, TrichotomyParams,
    TrichotomyResult,
};
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::minors::eigenvalues_by_magnitude;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DichotomyParams {
    pub b: i64,
    pub c: f64,
    pub sigma: usize,
    /// random triples used to measure the pair quality
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PairSource {
    /// `X` from a point where the Jacobian of the `(b+1)`-minors is small,
    /// `Y` spanned by the Davenport vectors at that point
    Minors {
        b: usize,
        x0: Vec<i64>,
        x0_class: DyadicClass,
        /// row-sum norm of `Q^{-1}`
        kappa_q: f64,
        flipped: bool,
        jacobian_bound: f64,
        eigenvalue_ratio: f64,
    },
    /// `X` where `x -> H_c(x)` is small, `Y = R^n`
    HessianMap { certified_bound: f64 },
}

/// Subspaces with `|Y^T H_c(X) Y'| <= threshold ||Y|| ||X|| ||Y'||`.
#[derive(Debug, Clone, Serialize)]
pub struct SubspacePair {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub source: PairSource,
    /// largest sampled `|Y^T H_c(X) Y'| / (||Y|| ||X|| ||Y'||)`
    pub quality: f64,
    /// `kappa / C`
    pub threshold: f64,
    pub kappa: f64,
    pub verified: bool,
}

impl SubspacePair {
    pub fn dimension_sum(&self) -> usize {
        self.x.len() + self.y.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub b: i64,
    pub sigma: usize,
    pub n_aux: u64,
    /// `L = 1 + log2 B`
    pub log_factor: f64,
    pub class: DyadicClass,
    pub pigeonhole_kappa: f64,
    /// lattice points in the unit boxes of the cover, an upper bound for `#K`
    pub class_points_bound: u64,
    /// `pigeonhole_kappa * class_points_bound * B^n L^n / 2^{e_1+..+e_k}`
    pub predicted: f64,
    /// `predicted / (B^{n+sigma} L^n)`
    pub kappa: f64,
    /// `N^aux / (B^{n+sigma} L^n)`
    pub kappa_measured: f64,
    pub unit_boxes: u64,
    pub side: f64,
    pub covered: bool,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome")]
pub enum Dichotomy {
    Bound(BoundCertificate),
    Pair(SubspacePair),
    Inconclusive(FailureWitness),
}

impl Dichotomy {
    pub fn label(&self) -> &'static str {
        match self {
            Dichotomy::Bound(_) => "BOUND",
            Dichotomy::Pair(_) => "PAIR",
            Dichotomy::Inconclusive(_) => "INCONCLUSIVE",
        }
    }
}

/// Pigeonhole, then the trichotomy on the winning class, then Davenport's
/// construction when the trichotomy returns a point with a small Jacobian.
/// `C >= 12 n^2` keeps every dyadic bound below `C B`.
pub fn dichotomy<S: Scalar>(c: &CubicForm<S>, params: DichotomyParams) -> Result<Dichotomy> {
    let n = c.n();
    let DichotomyParams { b, c: big_c, sigma, samples, seed } = params;
    let ph = pigeonhole(c, b, Strictness::Strict)?;
    let tri = trichotomy(c, TrichotomyParams { b, c: big_c, sigma }, &ph.class)?;
    let cf = c.to_float();
    Ok(match tri {
        TrichotomyResult::I(cover) => Dichotomy::Bound(bound_certificate(n, sigma, &ph, &cover)),
        TrichotomyResult::III(iii) => {
            let y: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect();
            let kappa = (n * n) as f64 * iii.certified_bound * big_c;
            let mut pair = SubspacePair {
                x: iii.basis,
                y,
                source: PairSource::HessianMap {
                    certified_bound: iii.certified_bound,
                },
                quality: 0.0,
                threshold: kappa / big_c,
                kappa,
                verified: false,
            };
            measure(&cf, &mut pair, samples, seed)?;
            Dichotomy::Pair(pair)
        }
        TrichotomyResult::II(ii) => {
            let cq = exact_form(c)?;
            let x0: Vec<Rational> = ii.x0.iter().map(|&v| Rational::from_i64(v)).collect();
            let sys = build_y_basis(&cq, &x0, ii.b)?;
            let x0f: Vec<f64> = ii.x0.iter().map(|&v| v as f64).collect();
            let h = cf.hessian(&x0f)?.into_matrix();
            let eig = eigenvalues_by_magnitude(&h)?;
            let lambda_b = eig[ii.b - 1].abs();
            if lambda_b <= EIGENVALUE_TOLERANCE * n as f64 * h.sup_norm() {
                return Err(Error::ZeroEigenvalue { index: ii.b });
            }
            let eigenvalue_ratio = eig[ii.b].abs() / lambda_b;
            let m = sys.dimension() as f64;
            let kappa_q = sys.kappa.as_f64();
            let kappa = m * m
                * kappa_q
                * kappa_q
                * trilinear_kappa(n, ii.b)
                * (ii.certified_bound + eigenvalue_ratio)
                * big_c;
            let mut pair = SubspacePair {
                x: ii.basis,
                y: sys.basis_f64(),
                source: PairSource::Minors {
                    b: ii.b,
                    x0: ii.x0,
                    x0_class: ii.x0_class,
                    kappa_q,
                    flipped: sys.flipped,
                    jacobian_bound: ii.certified_bound,
                    eigenvalue_ratio,
                },
                quality: 0.0,
                threshold: kappa / big_c,
                kappa,
                verified: false,
            };
            measure(&cf, &mut pair, samples, seed)?;
            Dichotomy::Pair(pair)
        }
        TrichotomyResult::Inconclusive(f) => Dichotomy::Inconclusive(f),
    })
}

fn bound_certificate(
    n: usize,
    sigma: usize,
    ph: &crate::counting::PigeonholeReport,
    cover: &CoverWitness,
) -> BoundCertificate {
    let b = ph.b;
    let per_side = cover.side.floor() as u64 + 1;
    let class_points_bound = cover.unit_boxes.saturating_mul(per_side.saturating_pow(n as u32));
    let l = ph.log_factor;
    let bn = (b as f64).powi(n as i32) * l.powi(n as i32);
    let predicted =
        ph.kappa_theory * class_points_bound as f64 * bn / 2f64.powi(ph.class.exponent_sum() as i32);
    let scale = bn * (b as f64).powi(sigma as i32);
    BoundCertificate {
        b,
        sigma,
        n_aux: ph.n_aux,
        log_factor: l,
        class: ph.class.clone(),
        pigeonhole_kappa: ph.kappa_theory,
        class_points_bound,
        predicted,
        kappa: predicted / scale,
        kappa_measured: ph.n_aux as f64 / scale,
        unit_boxes: cover.unit_boxes,
        side: cover.side,
        covered: cover.covered,
        verified: ph.verified && cover.covered && ph.n_aux as f64 <= predicted,
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut v = vec![0.0; n];
    for (b, t) in basis.iter().zip(coeffs) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += t * bi;
        }
    }
    v
}

/// Sample basis triples and random combinations.
fn measure(cf: &CubicForm<f64>, pair: &mut SubspacePair, samples: usize, seed: u64) -> Result<()> {
    let mut worst = 0.0f64;
    let mut ratio = |x: &[f64], y: &[f64], z: &[f64]| -> Result<()> {
        let d = sup(x) * sup(y) * sup(z);
        if d > 0.0 {
            worst = worst.max(cf.trilinear(x, y, z)?.abs() / d);
        }
        Ok(())
    };
    for x in &pair.x {
        for y in &pair.y {
            for z in &pair.y {
                ratio(x, y, z)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |basis: &[Vec<f64>]| {
        let t: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        combine(basis, &t)
    };
    for _ in 0..samples {
        let x = draw(&pair.x);
        let y = draw(&pair.y);
        let z = draw(&pair.y);
        ratio(&x, &y, &z)?;
    }
    pair.quality = worst;
    // float rounding in the sampled trilinear values
    pair.verified = worst <= pair.threshold + 1e-12;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fermat;
    use crate::scalar::int;

    fn params(b: i64, c: f64, sigma: usize) -> DichotomyParams {
        DichotomyParams {
            b,
            c,
            sigma,
            samples: 200,
            seed: 1,
        }
    }

    #[test]
    fn cylinder_gives_pair() {
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        match dichotomy(&c, params(4, 100.0, 1)).unwrap() {
            Dichotomy::Pair(p) => {
                assert_eq!(p.dimension_sum(), 5);
                assert!(p.verified);
                assert_eq!(p.quality, 0.0);
            }
            other => panic!("expected a pair, got {}", other.label()),
        }
    }

    #[test]
    fn fermat_gives_bound() {
        let f = fermat::<Rational>(3);
        match dichotomy(&f, params(16, 1e4, 0)).unwrap() {
            Dichotomy::Bound(cert) => {
                assert!(cert.verified, "{cert:?}");
                assert!(cert.kappa_measured <= cert.kappa);
            }
            other => panic!("expected a bound, got {}", other.label()),
        }
    }

    #[test]
    fn scaling_keeps_the_branch() {
        let c = CubicForm::new(3, [([0, 0, 0], int(1))]).unwrap();
        let scaled = c.scale(&int(7));
        let a = dichotomy(&c, params(3, 50.0, 1)).unwrap();
        let b = dichotomy(&scaled, params(3, 50.0, 1)).unwrap();
        assert_eq!(a.label(), b.label());
    }
}
