//! Per-iteration population statistics and their concatenation over a whole
//! trajectory.
//!
//! For one population of `λ` candidates in `d` dimensions, each of the
//! `d + 1` columns of `[X | y]` is summarised by its minimum, maximum, mean
//! and population standard deviation (divisor `λ`). An iteration therefore
//! contributes `4(d+1)` values laid out as
//!
//! ```text
//! min(x0..x{d-1}, y) | max(...) | mean(...) | std(...)
//! ```
//!
//! and a trajectory of `n` iterations yields `4n(d+1)` values in iteration
//! order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optimizers::{Algorithm, PopulationSnapshot, RunSpec, Trajectory};

pub const STATISTICS: [Statistic; 4] = [Statistic::Min, Statistic::Max, Statistic::Mean, Statistic::Std];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Min,
    Max,
    Mean,
    Std,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::Min => "min",
            Statistic::Max => "max",
            Statistic::Mean => "mean",
            Statistic::Std => "std",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identifies one optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunKey {
    pub algorithm: Algorithm,
    pub problem_id: u8,
    pub instance_id: u32,
    pub seed: u64,
}

impl From<&RunSpec> for RunKey {
    fn from(spec: &RunSpec) -> Self {
        Self {
            algorithm: spec.algorithm,
            problem_id: spec.problem_id,
            instance_id: spec.instance_id,
            seed: spec.seed,
        }
    }
}

/// Summary of one population. Each vector has `d + 1` entries: the
/// coordinates first, the objective value last.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl IterationStats {
    /// The four blocks in canonical order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.min.len());
        self.write_into(&mut out);
        out
    }

    fn write_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.min);
        out.extend_from_slice(&self.max);
        out.extend_from_slice(&self.mean);
        out.extend_from_slice(&self.std);
    }
}

pub fn iteration_stats(snapshot: &PopulationSnapshot) -> Result<IterationStats> {
    let lambda = snapshot.len();
    let d = snapshot.dimension;
    if lambda == 0 {
        return Err(invalid("cannot summarise an empty population"));
    }
    if snapshot.points.len() != lambda * d {
        return Err(invalid(format!(
            "snapshot {} has {} coordinates for {} candidates in dimension {}",
            snapshot.iteration,
            snapshot.points.len(),
            lambda,
            d
        )));
    }
    let columns = d + 1;
    let mut stats = IterationStats {
        iteration: snapshot.iteration,
        min: Vec::with_capacity(columns),
        max: Vec::with_capacity(columns),
        mean: Vec::with_capacity(columns),
        std: Vec::with_capacity(columns),
    };
    // columns are summed in sorted order so the result does not depend on
    // the order of the candidates
    let mut column = vec![0.0; lambda];
    for c in 0..columns {
        for (i, v) in column.iter_mut().enumerate() {
            *v = if c < d { snapshot.points[i * d + c] } else { snapshot.fitness[i] };
        }
        column.sort_unstable_by(f64::total_cmp);
        let (lo, hi) = (column[0], column[lambda - 1]);
        let (mean, std) = if lo == hi {
            (lo, 0.0)
        } else {
            let mean = (column.iter().sum::<f64>() / lambda as f64).clamp(lo, hi);
            let ss: f64 = column.iter().map(|v| (v - mean).powi(2)).sum();
            (mean, (ss / lambda as f64).sqrt())
        };
        stats.min.push(lo);
        stats.max.push(hi);
        stats.mean.push(mean);
        stats.std.push(std);
    }
    Ok(stats)
}

/// The full representation of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamoRepVector {
    pub key: RunKey,
    pub dimension: usize,
    pub iterations: usize,
    pub values: Vec<f64>,
}

impl DynamoRepVector {
    pub fn names(&self) -> Vec<String> {
        feature_names(self.dimension, self.iterations)
    }
}

pub fn trajectory_features(trajectory: &Trajectory) -> Result<DynamoRepVector> {
    let snaps = &trajectory.snapshots;
    let first = snaps.first().ok_or_else(|| invalid("trajectory has no snapshots"))?;
    let (lambda, d) = (first.len(), first.dimension);
    let mut values = Vec::with_capacity(4 * snaps.len() * (d + 1));
    for snap in snaps {
        if snap.len() != lambda || snap.dimension != d {
            return Err(invalid(format!(
                "snapshot {} has shape {}x{}, expected {}x{}",
                snap.iteration,
                snap.len(),
                snap.dimension,
                lambda,
                d
            )));
        }
        iteration_stats(snap)?.write_into(&mut values);
    }
    Ok(DynamoRepVector {
        key: RunKey::from(&trajectory.spec),
        dimension: d,
        iterations: snaps.len(),
        values,
    })
}

/// Component label: `x0..x{d-1}` for coordinates, `y` for the objective.
pub fn component_name(c: usize, d: usize) -> String {
    if c < d {
        format!("x{c}")
    } else {
        "y".to_string()
    }
}

/// Canonical names `it{t}_{stat}_{component}` in feature order.
pub fn feature_names(d: usize, n: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(4 * n * (d + 1));
    for t in 0..n {
        for stat in STATISTICS {
            for c in 0..=d {
                names.push(format!("it{t}_{stat}_{}", component_name(c, d)));
            }
        }
    }
    names
}

/// Inverse of the naming scheme: `(iteration, statistic, component index)`
/// where the component index `d` denotes the objective value.
pub fn parse_feature_name(name: &str, d: usize) -> Option<(usize, Statistic, usize)> {
    let rest = name.strip_prefix("it")?;
    let mut parts = rest.splitn(3, '_');
    let t = parts.next()?.parse().ok()?;
    let stat = match parts.next()? {
        "min" => Statistic::Min,
        "max" => Statistic::Max,
        "mean" => Statistic::Mean,
        "std" => Statistic::Std,
        _ => return None,
    };
    let comp = match parts.next()? {
        "y" => d,
        c => c.strip_prefix('x')?.parse().ok().filter(|&i: &usize| i < d)?,
    };
    Some((t, stat, comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snapshot(d: usize, points: Vec<f64>, fitness: Vec<f64>) -> PopulationSnapshot {
        PopulationSnapshot {
            iteration: 0,
            dimension: d,
            points,
            fitness,
        }
    }

    #[test]
    fn hand_computed_two_points() {
        let s = iteration_stats(&snapshot(1, vec![-1.0, 1.0], vec![0.0, 2.0])).unwrap();
        assert_eq!(s.min, vec![-1.0, 0.0]);
        assert_eq!(s.max, vec![1.0, 2.0]);
        assert_eq!(s.mean, vec![0.0, 1.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
    }

    #[test]
    fn single_candidate() {
        let s = iteration_stats(&snapshot(3, vec![0.1, -2.0, 3.3], vec![7.5])).unwrap();
        assert_eq!(s.min, vec![0.1, -2.0, 3.3, 7.5]);
        assert_eq!(s.max, s.min);
        assert_eq!(s.mean, s.min);
        assert_eq!(s.std, vec![0.0; 4]);
    }

    #[test]
    fn constant_column_has_exact_zero_std() {
        let s = iteration_stats(&snapshot(1, vec![0.1; 30], vec![0.3; 30])).unwrap();
        assert_eq!(s.std, vec![0.0, 0.0]);
        assert_eq!(s.mean, vec![0.1, 0.3]);
    }

    #[test]
    fn empty_rejected() {
        assert!(iteration_stats(&snapshot(2, vec![], vec![])).is_err());
    }

    #[test]
    fn names_for_smallest_case() {
        assert_eq!(
            feature_names(1, 1),
            [
                "it0_min_x0",
                "it0_min_y",
                "it0_max_x0",
                "it0_max_y",
                "it0_mean_x0",
                "it0_mean_y",
                "it0_std_x0",
                "it0_std_y"
            ]
        );
    }

    #[test]
    fn names_unique_and_parseable() {
        let names = feature_names(3, 30);
        assert_eq!(names.len(), 480);
        let set: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(set.len(), 480);
        for (pos, name) in names.iter().enumerate() {
            let (t, stat, c) = parse_feature_name(name, 3).unwrap();
            let s = STATISTICS.iter().position(|&x| x == stat).unwrap();
            assert_eq!(pos, t * 16 + s * 4 + c);
        }
        assert_eq!(parse_feature_name("it0_min_x3", 3), None);
    }

    fn arb_snapshot() -> impl Strategy<Value = PopulationSnapshot> {
        (1usize..5, 1usize..12).prop_flat_map(|(d, lambda)| {
            (
                prop::collection::vec(-5.0f64..5.0, d * lambda),
                prop::collection::vec(-1e3f64..1e3, lambda),
            )
                .prop_map(move |(p, f)| snapshot(d, p, f))
        })
    }

    proptest! {
        #[test]
        fn order_statistics_law(s in arb_snapshot()) {
            let st = iteration_stats(&s).unwrap();
            for c in 0..st.min.len() {
                prop_assert!(st.min[c] <= st.mean[c] && st.mean[c] <= st.max[c]);
                prop_assert!(st.std[c] >= 0.0);
            }
        }

        #[test]
        fn row_permutation_invariance(s in arb_snapshot(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut order: Vec<usize> = (0..s.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let d = s.dimension;
            let shuffled = snapshot(
                d,
                order.iter().flat_map(|&i| s.row(i).to_vec()).collect(),
                order.iter().map(|&i| s.fitness[i]).collect(),
            );
            let a = iteration_stats(&s).unwrap();
            let b = iteration_stats(&shuffled).unwrap();
            prop_assert_eq!(a.flatten(), b.flatten());
        }
    }
}
