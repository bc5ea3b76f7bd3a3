//! The covering trichotomy as a classifier on lattice points.
//!
//! Every subspace produced by the big-space lemma is spanned by standard
//! basis vectors, so `V` and `V^perp` are complementary coordinate sets and
//! the boxes `A_k(z)` are axis-aligned. Instead of centring boxes at class
//! points we use the aligned grid of the same shape; each grid cell plays
//! the role of one `A_k(z)` and the spread of the class points inside it is
//! what the lemma bounds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::dyadic::{DyadicClass, SpectrumOracle};
use super::enumerate::{box_size, decode, IntegerHessian};
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::matrix::Matrix;
use crate::minors::{max_sup_ratio, minors_jacobian, minors_vector, small_or_big, SmallOrBig};
use crate::scalar::Scalar;

pub const MAX_COVER_DIMENSION: usize = 4;
const SAMPLES: usize = 256;
const SAMPLE_SEED: u64 = 0x5eed;
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrichotomyParams {
    pub b: i64,
    pub c: f64,
    pub sigma: usize,
}

/// Axis-aligned lattice box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverBox {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    /// coordinates spanning `V` for the cell that produced the box
    pub subspace: Vec<usize>,
    pub points: u64,
}

impl CoverBox {
    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| l <= v && v <= u)
    }

    fn spread(&self) -> i64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    /// `E_{j+1} >= E_j / C`: plain subdivision
    pub trivial: bool,
    pub cells: usize,
    pub max_spread: i64,
    pub allowed_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverWitness {
    pub class: DyadicClass,
    /// set when the requested class had `k > n - sigma - 1`
    pub truncated_from: Option<DyadicClass>,
    pub boxes: Vec<CoverBox>,
    pub class_points: u64,
    pub side: f64,
    /// boxes of side `E_{k+1}` needed to cover the final boxes
    pub unit_boxes: u64,
    /// `B^sigma (E_1 ... E_{k+1}) E_{k+1}^{-sigma-k-1}`
    pub bound_shape: f64,
    /// `unit_boxes / bound_shape`
    pub constant: f64,
    pub epsilon: f64,
    pub kappa_side: f64,
    pub levels: Vec<LevelSummary>,
    /// every class point lies in some box (independent rescan of the box)
    pub covered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchII {
    pub b: usize,
    pub x0: Vec<i64>,
    pub x0_class: DyadicClass,
    /// orthonormal basis of `X`, dimension `sigma + b + 1`
    pub basis: Vec<Vec<f64>>,
    /// `sqrt(n) Lambda` of `J^(b+1)(x0) / ||Delta^(b)(x0)||`
    pub certified_bound: f64,
    pub sampled_ratio: f64,
    pub threshold: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchIII {
    /// orthonormal basis of `X`, dimension `sigma + 1`
    pub basis: Vec<Vec<f64>>,
    pub certified_bound: f64,
    pub sampled_ratio: f64,
    pub threshold: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureWitness {
    pub level: usize,
    pub point: Vec<i64>,
    pub other: Vec<i64>,
    pub spread: i64,
    pub allowed: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "branch")]
pub enum TrichotomyResult {
    I(CoverWitness),
    II(BranchII),
    III(BranchIII),
    Inconclusive(FailureWitness),
}

impl TrichotomyResult {
    pub fn label(&self) -> &'static str {
        match self {
            TrichotomyResult::I(_) => "I",
            TrichotomyResult::II(_) => "II",
            TrichotomyResult::III(_) => "III",
            TrichotomyResult::Inconclusive(_) => "inconclusive",
        }
    }
}

fn sampled_ratio(m: &Matrix<f64>, basis: &[Vec<f64>], scale: f64) -> f64 {
    let n = basis.first().map_or(0, Vec::len);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut vectors: Vec<Vec<f64>> = basis.to_vec();
    for _ in 0..SAMPLES {
        let mut v = vec![0.0; n];
        for b in basis {
            let t: f64 = rng.random_range(-1.0..1.0);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += t * bi;
            }
        }
        vectors.push(v);
    }
    max_sup_ratio(m, &vectors) / scale
}

fn bucket(v: i64, b: i64, width: f64) -> i64 {
    ((v + b) as f64 / width).floor() as i64
}

/// Lattice points of the class, in box order.
fn class_points(ih: &IntegerHessian, b: i64, class: &DyadicClass) -> Result<Vec<Vec<i64>>> {
    let n = ih.n();
    Ok((0..box_size(n, b)?)
        .into_par_iter()
        .filter_map(|idx| {
            let mut x = vec![0i64; n];
            decode(idx, b, &mut x);
            class
                .contains(&SpectrumOracle::new(n, ih.matrix(&x), ih.scale()))
                .then_some(x)
        })
        .collect())
}

struct Cell {
    subspace: Vec<usize>,
    members: Vec<usize>,
}

fn cells_to_boxes(points: &[Vec<i64>], cells: Vec<Cell>) -> Vec<CoverBox> {
    cells
        .into_iter()
        .map(|cell| {
            let n = points[cell.members[0]].len();
            let mut lower = vec![i64::MAX; n];
            let mut upper = vec![i64::MIN; n];
            for &m in &cell.members {
                for i in 0..n {
                    lower[i] = lower[i].min(points[m][i]);
                    upper[i] = upper[i].max(points[m][i]);
                }
            }
            CoverBox {
                lower,
                upper,
                subspace: cell.subspace,
                points: cell.members.len() as u64,
            }
        })
        .collect()
}

/// Farthest pair inside a cell, for the failure witness.
fn widest_pair(points: &[Vec<i64>], members: &[usize]) -> (Vec<i64>, Vec<i64>, i64) {
    let mut best = (members[0], members[0], 0);
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(p, q)| (p - q).abs())
                .max()
                .unwrap_or(0);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (points[best.0].clone(), points[best.1].clone(), best.2)
}

/// Group class points into grid cells. `widths[i]` is the cell width along
/// coordinate `i`; cells never straddle boxes of the previous level.
fn group(
    points: &[Vec<i64>],
    owner: &[usize],
    subspaces: &[Vec<usize>],
    b: i64,
    width_in_v: f64,
    width_out: f64,
) -> Vec<Cell> {
    let mut map: BTreeMap<(usize, Vec<usize>, Vec<i64>), Vec<usize>> = BTreeMap::new();
    for (p, x) in points.iter().enumerate() {
        let v = &subspaces[p];
        let key: Vec<i64> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let w = if v.contains(&i) { width_in_v } else { width_out };
                bucket(xi, b, w)
            })
            .collect();
        map.entry((owner[p], v.clone(), key)).or_default().push(p);
    }
    map.into_iter()
        .map(|((_, subspace, _), members)| Cell { subspace, members })
        .collect()
}

enum PointAnalysis {
    Small { basis: Vec<Vec<f64>>, certified: f64, jac: Matrix<f64> },
    Big(Vec<usize>),
}

fn analyse_point(cf: &CubicForm<f64>, x: &[i64], j: usize, keep: usize, c: f64) -> Result<PointAnalysis> {
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let jac = minors_jacobian(cf, &xf, j + 1)?;
    let delta = minors_vector(cf, &xf, j)?.sup_norm();
    if delta == 0.0 {
        return Err(Error::VanishingMinor { b: j });
    }
    let normalised = jac.map(|v| v / delta);
    match small_or_big(&normalised, keep, c)? {
        SmallOrBig::Small(s) => Ok(PointAnalysis::Small {
            basis: s.basis,
            certified: s.certified_bound,
            jac: normalised,
        }),
        SmallOrBig::Big(big) => Ok(PointAnalysis::Big(big.indices)),
    }
}

/// Run the trichotomy for one class.
pub fn trichotomy<S: Scalar>(
    c: &CubicForm<S>,
    params: TrichotomyParams,
    class: &DyadicClass,
) -> Result<TrichotomyResult> {
    let n = c.n();
    let TrichotomyParams { b, c: big_c, sigma } = params;
    if n > MAX_COVER_DIMENSION {
        return Err(Error::OutOfRange(format!(
            "covering is limited to n <= {MAX_COVER_DIMENSION}"
        )));
    }
    if b < 1 || !(big_c >= 1.0) || sigma >= n {
        return Err(Error::OutOfRange(format!(
            "need B >= 1, C >= 1, sigma < n (got B = {b}, C = {big_c}, sigma = {sigma})"
        )));
    }
    let ih = IntegerHessian::new(c)?;
    let cf = c.to_float();
    let max_k = n - sigma - 1;
    let (class, truncated_from) = if class.k() > max_k {
        (class.truncate(max_k), Some(class.clone()))
    } else {
        (class.clone(), None)
    };
    let k = class.k();
    let e = class.bounds();
    if e[0] > big_c * b as f64 {
        return Err(Error::OutOfRange(format!("E_1 = {} exceeds C B", e[0])));
    }
    let threshold = 1.0 / big_c;

    // branch III: x -> H_c(x) small on a (sigma+1)-dimensional space
    let map = cf.hessian_map_matrix()?;
    let big = match small_or_big(&map, n - sigma, big_c)? {
        SmallOrBig::Small(s) => {
            let ratio = sampled_ratio(&map, &s.basis, 1.0);
            return Ok(TrichotomyResult::III(BranchIII {
                verified: s.certified_bound <= threshold && ratio <= threshold * (1.0 + SLACK),
                basis: s.basis,
                certified_bound: s.certified_bound,
                sampled_ratio: ratio,
                threshold,
            }));
        }
        SmallOrBig::Big(big) => big,
    };

    let points = class_points(&ih, b, &class)?;
    let nf = n as f64;
    let epsilon = 1.0 / (16.0 * big_c * nf);
    let kappa_side = (4.0 * nf * nf * big_c).max(2.0);
    let mut levels = Vec::new();

    let mut boxes: Vec<CoverBox> = Vec::new();
    if !points.is_empty() {
        // level 0: V^perp side E_1, V side B
        let subspaces = vec![big.indices.clone(); points.len()];
        let owner = vec![0usize; points.len()];
        let cells = group(&points, &owner, &subspaces, b, (2 * b + 1) as f64, 2.0 * e[0]);
        let allowed = (2.0f64).max((2.0 + 12.0 * nf) / big.certified_lower) * e[0] * (1.0 + SLACK);
        if let Some(fail) = check_spread(&points, &cells, allowed, 0) {
            return Ok(TrichotomyResult::Inconclusive(fail));
        }
        levels.push(LevelSummary {
            level: 0,
            trivial: false,
            cells: cells.len(),
            max_spread: max_spread(&points, &cells),
            allowed_spread: allowed,
        });
        let mut owner_cells = cells;

        for j in 1..=k {
            let owner = assign_owner(points.len(), &owner_cells);
            let (ej, ej1) = (e[j - 1], e[j]);
            if ej1 >= ej / big_c {
                let subspaces = vec![Vec::new(); points.len()];
                let cells = group(&points, &owner, &subspaces, b, 1.0, 2.0 * ej1);
                levels.push(LevelSummary {
                    level: j,
                    trivial: true,
                    cells: cells.len(),
                    max_spread: max_spread(&points, &cells),
                    allowed_spread: 2.0 * ej1,
                });
                owner_cells = cells;
                continue;
            }
            let keep = n - sigma - j;
            let analyses: Vec<PointAnalysis> = points
                .par_iter()
                .map(|x| analyse_point(&cf, x, j, keep, big_c))
                .collect::<Result<_>>()?;
            let mut subspaces = Vec::with_capacity(points.len());
            for (p, a) in analyses.into_iter().enumerate() {
                match a {
                    PointAnalysis::Small { basis, certified, jac } => {
                        let ratio = sampled_ratio(&jac, &basis, 1.0);
                        return Ok(TrichotomyResult::II(BranchII {
                            b: j,
                            x0: points[p].clone(),
                            x0_class: class.truncate(j),
                            verified: certified <= threshold && ratio <= threshold * (1.0 + SLACK),
                            basis,
                            certified_bound: certified,
                            sampled_ratio: ratio,
                            threshold,
                        }));
                    }
                    PointAnalysis::Big(v) => subspaces.push(v),
                }
            }
            let cells = group(&points, &owner, &subspaces, b, 2.0 * epsilon * ej, 2.0 * ej1);
            let allowed = kappa_side * ej1 * (1.0 + SLACK);
            if let Some(fail) = check_spread(&points, &cells, allowed, j) {
                return Ok(TrichotomyResult::Inconclusive(fail));
            }
            levels.push(LevelSummary {
                level: j,
                trivial: false,
                cells: cells.len(),
                max_spread: max_spread(&points, &cells),
                allowed_spread: allowed,
            });
            owner_cells = cells;
        }
        boxes = cells_to_boxes(&points, owner_cells);
    }

    let side = e[k];
    let per_side = side.floor() as i64 + 1;
    let unit_boxes = boxes
        .iter()
        .map(|bx| {
            bx.lower
                .iter()
                .zip(&bx.upper)
                .map(|(l, u)| ((u - l + 1) + per_side - 1) / per_side)
                .product::<i64>() as u64
        })
        .sum();
    let bound_shape = (b as f64).powi(sigma as i32) * e.iter().product::<f64>()
        * side.powi(-((sigma + k + 1) as i32));
    let covered = verify_cover(&ih, b, &class, &boxes)?;
    Ok(TrichotomyResult::I(CoverWitness {
        class,
        truncated_from,
        class_points: points.len() as u64,
        side,
        unit_boxes,
        bound_shape,
        constant: unit_boxes as f64 / bound_shape,
        epsilon,
        kappa_side,
        levels,
        covered,
        boxes,
    }))
}

fn assign_owner(len: usize, cells: &[Cell]) -> Vec<usize> {
    let mut owner = vec![0; len];
    for (id, cell) in cells.iter().enumerate() {
        for &m in &cell.members {
            owner[m] = id;
        }
    }
    owner
}

fn cell_spread(points: &[Vec<i64>], members: &[usize]) -> i64 {
    let n = points[members[0]].len();
    (0..n)
        .map(|i| {
            let (lo, hi) = members
                .iter()
                .fold((i64::MAX, i64::MIN), |(lo, hi), &m| (lo.min(points[m][i]), hi.max(points[m][i])));
            hi - lo
        })
        .max()
        .unwrap_or(0)
}

fn max_spread(points: &[Vec<i64>], cells: &[Cell]) -> i64 {
    cells.iter().map(|c| cell_spread(points, &c.members)).max().unwrap_or(0)
}

fn check_spread(points: &[Vec<i64>], cells: &[Cell], allowed: f64, level: usize) -> Option<FailureWitness> {
    cells.iter().find_map(|cell| {
        let spread = cell_spread(points, &cell.members);
        if spread as f64 <= allowed {
            return None;
        }
        let (point, other, _) = widest_pair(points, &cell.members);
        Some(FailureWitness {
            level,
            point,
            other,
            spread,
            allowed,
            reason: format!("cell spread {spread} exceeds {allowed:.3}"),
        })
    })
}

/// Rescan the whole box and check that each class point lies in a box.
fn verify_cover(ih: &IntegerHessian, b: i64, class: &DyadicClass, boxes: &[CoverBox]) -> Result<bool> {
    let n = ih.n();
    Ok((0..box_size(n, b)?).into_par_iter().all(|idx| {
        let mut x = vec![0i64; n];
        decode(idx, b, &mut x);
        !class.contains(&SpectrumOracle::new(n, ih.matrix(&x), ih.scale()))
            || boxes.iter().any(|bx| bx.contains(&x))
    }))
}

/// Branch I only: a verified cover, or the reason none was produced.
pub fn cover_class<S: Scalar>(
    c: &CubicForm<S>,
    params: TrichotomyParams,
    class: &DyadicClass,
) -> Result<std::result::Result<CoverWitness, FailureWitness>> {
    Ok(match trichotomy(c, params, class)? {
        TrichotomyResult::I(w) => Ok(w),
        TrichotomyResult::Inconclusive(f) => Err(f),
        TrichotomyResult::II(ii) => Err(FailureWitness {
            level: ii.b,
            point: ii.x0.clone(),
            other: ii.x0,
            spread: 0,
            allowed: 0.0,
            reason: format!("Jacobian of the {}x{} minors is small on a subspace", ii.b + 1, ii.b + 1),
        }),
        TrichotomyResult::III(_) => Err(FailureWitness {
            level: 0,
            point: vec![],
            other: vec![],
            spread: 0,
            allowed: 0.0,
            reason: "the Hessian map is small on a subspace".into(),
        }),
    })
}

impl CoverWitness {
    pub fn max_box_spread(&self) -> i64 {
        self.boxes.iter().map(CoverBox::spread).max().unwrap_or(0)
    }
}
