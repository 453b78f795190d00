//! Random forest classifier with gini splits and impurity importances.

mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;
use crate::table::FeatureTable;

pub use tree::{Node, Tree};
use tree::{grow, GrowParams, RankedData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means ⌈√p⌉.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            min_samples_split: 2,
            max_features: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(invalid("n_trees must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(invalid("min_samples_split must be at least 2"));
        }
        if self.max_features == Some(0) {
            return Err(invalid("max_features must be at least 1"));
        }
        Ok(())
    }

    pub fn features_per_split(&self, p: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub n_features: usize,
    /// Sorted distinct training labels; leaves store indices into this list.
    pub classes: Vec<u8>,
    pub trees: Vec<Tree>,
    pub importances: Vec<f64>,
}

impl ForestModel {
    /// Fit on a row-major matrix with `n_cols` columns.
    pub fn fit(x: &[f64], n_cols: usize, labels: &[u8], config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        if n_cols == 0 {
            return Err(invalid("no feature columns"));
        }
        if x.len() != labels.len() * n_cols {
            return Err(invalid(format!(
                "{} values do not form {} rows of {n_cols} columns",
                x.len(),
                labels.len()
            )));
        }
        if labels.len() < 2 {
            return Err(invalid("at least two training rows are required"));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "missing or non-finite value at row {}, column {}; run feature elimination first",
                pos / n_cols,
                pos % n_cols
            )));
        }

        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let class_idx: Vec<u16> = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label present") as u16)
            .collect();
        let data = RankedData::new(x, n_cols, class_idx, classes.len());
        let params = GrowParams {
            max_features: config.features_per_split(n_cols),
            min_samples_split: config.min_samples_split,
        };
        let n = labels.len();

        let grown: Vec<(Tree, Vec<f64>)> = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::stream(&[config.seed, t as u64]);
                let mut weights = vec![0u32; n];
                if config.bootstrap {
                    for _ in 0..n {
                        weights[rng.random_range(0..n)] += 1;
                    }
                } else {
                    weights.fill(1);
                }
                grow(&data, &weights, &params, &mut rng)
            })
            .collect();

        let mut importances = vec![0.0; n_cols];
        let mut split_trees = 0;
        for (tree, raw) in &grown {
            let sum: f64 = raw.iter().sum();
            if tree.node_count() > 1 && sum > 0.0 {
                split_trees += 1;
                for (acc, v) in importances.iter_mut().zip(raw) {
                    *acc += v / sum;
                }
            }
        }
        if split_trees > 0 {
            let sum: f64 = importances.iter().sum();
            importances.iter_mut().for_each(|v| *v /= sum);
        }

        Ok(Self {
            config: config.clone(),
            n_features: n_cols,
            classes,
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            importances,
        })
    }

    pub fn fit_table(table: &FeatureTable, config: &ForestConfig) -> Result<Self> {
        let labels: Vec<u8> = (0..table.n_rows()).map(|i| table.label(i)).collect();
        Self::fit(&table.values, table.n_cols(), &labels, config)
    }

    fn check_width(&self, x: &[f64]) -> Result<usize> {
        if !x.len().is_multiple_of(self.n_features) {
            return Err(invalid(format!(
                "query has {} values, not a multiple of the {} training columns",
                x.len(),
                self.n_features
            )));
        }
        Ok(x.len() / self.n_features)
    }

    /// Votes per row, aligned with `classes`.
    pub fn predict_counts(&self, x: &[f64]) -> Result<Vec<Vec<u32>>> {
        let rows = self.check_width(x)?;
        Ok((0..rows)
            .map(|i| {
                let row = &x[i * self.n_features..(i + 1) * self.n_features];
                let mut votes = vec![0u32; self.classes.len()];
                for tree in &self.trees {
                    votes[tree.leaf_class(row)] += 1;
                }
                votes
            })
            .collect())
    }

    /// Majority vote; ties go to the smallest class id.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<u8>> {
        Ok(self
            .predict_counts(x)?
            .iter()
            .map(|votes| {
                let best = votes
                    .iter()
                    .enumerate()
                    .fold(0, |b, (c, &v)| if v > votes[b] { c } else { b });
                self.classes[best]
            })
            .collect())
    }

    pub fn predict_table(&self, table: &FeatureTable) -> Result<Vec<u8>> {
        if table.n_cols() != self.n_features {
            return Err(invalid(format!(
                "table has {} columns, model was trained on {}",
                table.n_cols(),
                self.n_features
            )));
        }
        self.predict(&table.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_fixed_configuration() {
        let c = ForestConfig::default();
        assert_eq!((c.n_trees, c.min_samples_split, c.bootstrap, c.seed), (100, 2, true, 0));
        assert_eq!(c.features_per_split(480), 22);
        assert_eq!(c.features_per_split(45), 7);
        assert_eq!(c.features_per_split(2), 2);
        assert_eq!(c.features_per_split(1), 1);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = ForestConfig::default();
        c.n_trees = 0;
        assert!(c.validate().is_err());
        let mut c = ForestConfig::default();
        c.min_samples_split = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn tie_goes_to_smallest_class() {
        // Two trees, each a single leaf, voting for different classes.
        let model = ForestModel {
            config: ForestConfig::default(),
            n_features: 1,
            classes: vec![3, 7],
            trees: vec![
                Tree {
                    nodes: vec![Node::Leaf { class: 1 }],
                },
                Tree {
                    nodes: vec![Node::Leaf { class: 0 }],
                },
            ],
            importances: vec![0.0],
        };
        assert_eq!(model.predict_counts(&[0.0]).unwrap(), vec![vec![1, 1]]);
        assert_eq!(model.predict(&[0.0]).unwrap(), vec![3]);
    }

    #[test]
    fn json_round_trip() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let model = ForestModel::fit(&x, 1, &[1, 1, 2, 2], &ForestConfig {
            n_trees: 3,
            ..Default::default()
        })
        .unwrap();
        let back: ForestModel = serde_json::from_str(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
    }
}
