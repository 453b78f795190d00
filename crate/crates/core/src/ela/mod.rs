//! Landscape features computed from every point a run evaluated.
//!
//! All populations of a trajectory are stacked into one sample (duplicates
//! kept) and summarised by four feature groups: `basic`, `disp`, `ela_meta`
//! and `pca`. Undefined values (zero denominators, too few points) are NaN.

mod basic;
mod disp;
mod eliminate;
mod meta;
mod pca;

use crate::features::RunKey;
use crate::optimizers::Trajectory;

pub use basic::basic_features;
pub use disp::{disp_features, DISP_QUANTILES};
pub use eliminate::{eliminate_features, ColumnMask};
pub use meta::{fit_least_squares, meta_features, LinearFit};
pub use pca::{explained_variance, pca_features};

/// Named feature values in a fixed order.
pub type NamedFeatures = Vec<(String, f64)>;

/// Every evaluated point of one run, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample {
    pub dimension: usize,
    pub points: Vec<f64>,
    pub fitness: Vec<f64>,
}

impl PooledSample {
    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }
}

/// Concatenate all snapshots in (iteration, individual) order.
pub fn pool_trajectory(trajectory: &Trajectory) -> PooledSample {
    let dimension = trajectory.spec.dimension;
    let total: usize = trajectory.snapshots.iter().map(|s| s.len()).sum();
    let mut points = Vec::with_capacity(total * dimension);
    let mut fitness = Vec::with_capacity(total);
    for snap in &trajectory.snapshots {
        points.extend_from_slice(&snap.points);
        fitness.extend_from_slice(&snap.fitness);
    }
    PooledSample {
        dimension,
        points,
        fitness,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElaVector {
    pub key: RunKey,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// All four feature groups for one sample.
pub fn ela_features(sample: &PooledSample) -> NamedFeatures {
    let mut out = basic_features(sample);
    out.extend(disp_features(sample));
    out.extend(meta_features(sample));
    out.extend(pca_features(sample));
    out
}

pub fn trajectory_ela(trajectory: &Trajectory) -> ElaVector {
    let (names, values) = ela_features(&pool_trajectory(trajectory)).into_iter().unzip();
    ElaVector {
        key: RunKey::from(&trajectory.spec),
        names,
        values,
    }
}

/// Feature names produced by [`ela_features`]; they do not depend on the
/// sample.
pub fn ela_feature_names() -> Vec<String> {
    let probe = PooledSample {
        dimension: 2,
        points: vec![0.0, 0.0, 1.0, 0.5, 0.2, 1.0, 0.7, 0.1],
        fitness: vec![0.0, 1.0, 2.0, 3.0],
    };
    ela_features(&probe).into_iter().map(|(n, _)| n).collect()
}

pub(crate) fn ratio_or_nan(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}
