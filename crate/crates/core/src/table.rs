//! Labelled feature matrices keyed by run.

use std::collections::HashSet;

use crate::error::{invalid, Result};
use crate::features::RunKey;

/// Row-major feature matrix; the label of a row is its problem class.
/// Missing values are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub keys: Vec<RunKey>,
    pub values: Vec<f64>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            keys: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.keys.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn push(&mut self, key: RunKey, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols() {
            return Err(invalid(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.n_cols()
            )));
        }
        self.keys.push(key);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.keys[i].problem_id
    }

    /// Keys must be unique and labels within `1..=24`.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.keys.len());
        for key in &self.keys {
            if !seen.insert(key) {
                return Err(invalid(format!("duplicate row key {key:?}")));
            }
            if !(1..=crate::bbob::NUM_CLASSES).contains(&key.problem_id) {
                return Err(invalid(format!("label {} outside 1..=24", key.problem_id)));
            }
        }
        if self.values.len() != self.keys.len() * self.n_cols() {
            return Err(invalid("value count does not match table shape"));
        }
        Ok(())
    }

    /// Sort rows by key so that row order is canonical.
    pub fn sort_by_key(&mut self) {
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by_key(|&i| self.keys[i]);
        *self = self.select_rows(&order);
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureTable {
        let mut out = FeatureTable::new(self.names.clone());
        out.values.reserve(rows.len() * self.n_cols());
        for &i in rows {
            out.keys.push(self.keys[i]);
            out.values.extend_from_slice(self.row(i));
        }
        out
    }

    pub fn select_columns(&self, columns: &[usize]) -> FeatureTable {
        let mut out = FeatureTable::new(columns.iter().map(|&j| self.names[j].clone()).collect());
        out.keys = self.keys.clone();
        out.values.reserve(self.n_rows() * columns.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            out.values.extend(columns.iter().map(|&j| row[j]));
        }
        out
    }

    /// Row indices matching a predicate on the key.
    pub fn rows_where(&self, mut pred: impl FnMut(&RunKey) -> bool) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| pred(&self.keys[i])).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        let mut seeds: Vec<u64> = self.keys.iter().map(|k| k.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        seeds
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}
