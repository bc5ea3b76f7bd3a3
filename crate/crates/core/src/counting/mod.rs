//! Counting functions for the auxiliary inequality, dyadic eigenvalue
//! classes, the pigeonhole step and the covering trichotomy.

mod aux;
mod bounds;
mod cover;
mod dyadic;
mod enumerate;
mod pigeonhole;

use serde::{Deserialize, Serialize};

pub use aux::{count_aux, count_aux_by_class, count_aux_eq, count_nh, partition_check, PartitionReport};
pub use bounds::{ellipsoid_bound, EllipsoidBound};
pub use cover::{
    cover_class, trichotomy, BranchII, BranchIII, CoverBox, CoverWitness, FailureWitness, TrichotomyParams,
    TrichotomyResult,
};
pub use dyadic::{class_histogram, classify_dyadic, inertia, DyadicClass, SpectrumOracle};
pub use enumerate::{box_size, decode, IntegerHessian, SlabSystem};
pub use pigeonhole::{pigeonhole, PigeonholeBranch, PigeonholeReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// `< B`
    Strict,
    /// `<= B`
    Weak,
}

impl Strictness {
    pub fn is_strict(self) -> bool {
        self == Strictness::Strict
    }
}

/// Points of one dyadic class and the pairs they contribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCount {
    pub class: DyadicClass,
    pub label: String,
    pub points: u64,
    pub pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub count: u64,
    pub b: i64,
    pub strictness: Strictness,
    pub breakdown: Option<Vec<ClassCount>>,
}

impl CountReport {
    fn plain(count: u64, b: i64, strictness: Strictness) -> Self {
        CountReport {
            count,
            b,
            strictness,
            breakdown: None,
        }
    }
}
