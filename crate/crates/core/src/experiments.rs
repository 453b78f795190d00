//! Cross-validation folds, the two seed-generalization settings, and the
//! accuracy, confusion and importance reports built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbob::NUM_CLASSES;
use crate::ela::ColumnMask;
use crate::error::{invalid, Result};
use crate::forest::{ForestConfig, ForestModel};
use crate::optimizers::Algorithm;
use crate::table::FeatureTable;

/// Contiguous instance-id ranges, one per fold, applied to every class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub instance_count: u32,
    pub ranges: Vec<(u32, u32)>,
}

/// Split ids `1..=n` into `k` contiguous folds. When `k` does not divide
/// `n` the first `n % k` folds hold one extra id.
pub fn stratified_folds(n: u32, k: usize) -> Result<FoldPlan> {
    if k < 2 {
        return Err(invalid("at least two folds are required"));
    }
    if (n as usize) < k {
        return Err(invalid(format!("{n} instances cannot fill {k} folds")));
    }
    let (base, extra) = (n / k as u32, n % k as u32);
    let mut start = 1;
    let ranges = (0..k as u32)
        .map(|j| {
            let size = base + u32::from(j < extra);
            let range = (start, start + size - 1);
            start += size;
            range
        })
        .collect();
    Ok(FoldPlan {
        instance_count: n,
        ranges,
    })
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.ranges.len()
    }

    pub fn test_ids(&self, fold: usize) -> RangeInclusive<u32> {
        let (a, b) = self.ranges[fold];
        a..=b
    }

    pub fn fold_of(&self, instance_id: u32) -> Option<usize> {
        self.ranges
            .iter()
            .position(|&(a, b)| (a..=b).contains(&instance_id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    DynamoRep,
    Ela,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::DynamoRep => "dynamorep",
            FeatureKind::Ela => "ela",
        }
    }

    /// ELA tables contain missing and constant columns that are removed
    /// per fold before training.
    pub fn needs_elimination(self) -> bool {
        self == FeatureKind::Ela
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dynamorep" => Ok(FeatureKind::DynamoRep),
            "ela" => Ok(FeatureKind::Ela),
            other => Err(invalid(format!("unknown feature kind {other:?}"))),
        }
    }
}

/// Which rows train the model of each fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case")]
pub enum Setting {
    /// Train on one seed, test on the others.
    One { train_seed: u64 },
    /// Train on every seed but one, test on the held-out seed.
    Two { test_seed: u64 },
}

impl Setting {
    pub fn number(self) -> u8 {
        match self {
            Setting::One { .. } => 1,
            Setting::Two { .. } => 2,
        }
    }

    /// The seed that names this evaluation: the train seed in setting one,
    /// the held-out seed in setting two.
    pub fn seed(self) -> u64 {
        match self {
            Setting::One { train_seed } => train_seed,
            Setting::Two { test_seed } => test_seed,
        }
    }

    pub fn trains_on(self, seed: u64) -> bool {
        match self {
            Setting::One { train_seed } => seed == train_seed,
            Setting::Two { test_seed } => seed != test_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub test_seed: u64,
    pub n_test: usize,
    #[serde(deserialize_with = "crate::store::nan_from_null")]
    pub accuracy: f64,
    /// False when `test_seed` also contributed training rows.
    pub generalization: bool,
}

/// Counts indexed `[true - 1][predicted - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: Vec<Vec<u64>>,
}

impl Default for Confusion {
    fn default() -> Self {
        Self {
            counts: vec![vec![0; NUM_CLASSES as usize]; NUM_CLASSES as usize],
        }
    }
}

impl Confusion {
    pub fn add(&mut self, predictions: &[u8], labels: &[u8]) {
        for (&p, &t) in predictions.iter().zip(labels) {
            self.counts[t as usize - 1][p as usize - 1] += 1;
        }
    }

    pub fn merge(&mut self, other: &Confusion) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Copy with the diagonal zeroed, leaving only misclassifications.
    pub fn errors_only(&self) -> Confusion {
        let mut out = self.clone();
        for (i, row) in out.counts.iter_mut().enumerate() {
            row[i] = 0;
        }
        out
    }
}

pub fn confusion(predictions: &[u8], labels: &[u8]) -> Confusion {
    let mut c = Confusion::default();
    c.add(predictions, labels);
    c
}

pub fn accuracy(predictions: &[u8], labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return f64::NAN;
    }
    let hits = predictions.iter().zip(labels).filter(|(p, t)| p == t).count();
    hits as f64 / labels.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    #[serde(deserialize_with = "crate::store::nan_from_null")]
    pub mean: f64,
    #[serde(deserialize_with = "crate::store::nan_from_null")]
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for one value.
    #[serde(deserialize_with = "crate::store::nan_from_null")]
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            median: f64::NAN,
            std: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        median: quantile(values, 0.5),
        std: var.sqrt(),
    }
}

/// Linear-interpolation quantile of unsorted values.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub algorithm: Algorithm,
    pub feature_kind: FeatureKind,
    #[serde(flatten)]
    pub setting: Setting,
    pub forest_seed: u64,
    pub per_fold: Vec<FoldRecord>,
    /// Summary over generalization records only.
    pub summary: Summary,
    /// Full confusion over generalization records; diagonal included.
    pub confusion: Confusion,
    pub feature_names: Vec<String>,
    /// One importance vector per fold over `feature_names`; eliminated
    /// columns score 0.
    pub importances: Vec<Vec<f64>>,
}

impl EvaluationReport {
    pub fn generalization_accuracies(&self) -> Vec<f64> {
        self.per_fold
            .iter()
            .filter(|r| r.generalization)
            .map(|r| r.accuracy)
            .collect()
    }
}

struct FoldOutcome {
    records: Vec<FoldRecord>,
    confusion: Confusion,
    importances: Vec<f64>,
}

/// Run one setting over every fold of `plan`. The table must hold a single
/// algorithm's rows.
pub fn evaluate(
    table: &FeatureTable,
    plan: &FoldPlan,
    setting: Setting,
    kind: FeatureKind,
    forest: &ForestConfig,
) -> Result<EvaluationReport> {
    table.validate()?;
    let algorithm = single_algorithm(table)?;
    let seeds = table.seeds();
    if !seeds.contains(&setting.seed()) {
        return Err(invalid(format!("seed {} not present in table", setting.seed())));
    }
    if setting.number() == 2 && seeds.len() < 2 {
        return Err(invalid("setting two needs at least two seeds"));
    }
    let folds = row_folds(table, plan)?;

    let outcomes: Vec<FoldOutcome> = (0..plan.k())
        .into_par_iter()
        .map(|j| run_fold(table, &folds, j, setting, kind, forest))
        .collect::<Result<_>>()?;

    let mut per_fold = Vec::new();
    let mut total = Confusion::default();
    let mut importances = Vec::new();
    for outcome in outcomes {
        per_fold.extend(outcome.records);
        total.merge(&outcome.confusion);
        importances.push(outcome.importances);
    }
    let generalization: Vec<f64> = per_fold
        .iter()
        .filter(|r| r.generalization)
        .map(|r| r.accuracy)
        .collect();
    Ok(EvaluationReport {
        algorithm,
        feature_kind: kind,
        setting,
        forest_seed: forest.seed,
        summary: summarize(&generalization),
        per_fold,
        confusion: total,
        feature_names: table.names.clone(),
        importances,
    })
}

pub fn setting_one(
    table: &FeatureTable,
    plan: &FoldPlan,
    train_seed: u64,
    kind: FeatureKind,
    forest: &ForestConfig,
) -> Result<EvaluationReport> {
    evaluate(table, plan, Setting::One { train_seed }, kind, forest)
}

pub fn setting_two(
    table: &FeatureTable,
    plan: &FoldPlan,
    test_seed: u64,
    kind: FeatureKind,
    forest: &ForestConfig,
) -> Result<EvaluationReport> {
    evaluate(table, plan, Setting::Two { test_seed }, kind, forest)
}

fn single_algorithm(table: &FeatureTable) -> Result<Algorithm> {
    let first = table
        .keys
        .first()
        .ok_or_else(|| invalid("empty feature table"))?
        .algorithm;
    if table.keys.iter().any(|k| k.algorithm != first) {
        return Err(invalid("feature table mixes algorithms"));
    }
    Ok(first)
}

/// Training rows of one fold and the test rows of every seed, given each
/// row's fold index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<(u64, Vec<usize>)>,
}

pub fn split_rows(table: &FeatureTable, folds: &[usize], fold: usize, setting: Setting) -> FoldSplit {
    let train = (0..table.n_rows())
        .filter(|&i| folds[i] != fold && setting.trains_on(table.keys[i].seed))
        .collect();
    let test = table
        .seeds()
        .into_iter()
        .map(|seed| {
            let rows = (0..table.n_rows())
                .filter(|&i| folds[i] == fold && table.keys[i].seed == seed)
                .collect();
            (seed, rows)
        })
        .collect();
    FoldSplit { train, test }
}

/// Fold index of every row.
pub fn row_folds(table: &FeatureTable, plan: &FoldPlan) -> Result<Vec<usize>> {
    table
        .keys
        .iter()
        .map(|k| {
            plan.fold_of(k.instance_id).ok_or_else(|| {
                invalid(format!(
                    "instance {} outside the fold plan of {} instances",
                    k.instance_id, plan.instance_count
                ))
            })
        })
        .collect()
}

fn run_fold(
    table: &FeatureTable,
    folds: &[usize],
    fold: usize,
    setting: Setting,
    kind: FeatureKind,
    forest: &ForestConfig,
) -> Result<FoldOutcome> {
    let FoldSplit { train: train_rows, test } = split_rows(table, folds, fold, setting);
    if train_rows.len() < 2 {
        return Err(invalid(format!("fold {fold} has fewer than two training rows")));
    }
    let mask = if kind.needs_elimination() {
        ColumnMask::fit(table, &train_rows)?
    } else {
        ColumnMask {
            keep: (0..table.n_cols()).collect(),
            original_width: table.n_cols(),
        }
    };
    let train = mask.apply(&table.select_rows(&train_rows))?;
    let model = ForestModel::fit_table(&train, forest)?;

    let mut records = Vec::new();
    let mut confusion_total = Confusion::default();
    for (seed, test_rows) in test {
        if test_rows.is_empty() {
            continue;
        }
        let test = mask.apply(&table.select_rows(&test_rows))?;
        let labels: Vec<u8> = (0..test.n_rows()).map(|i| test.label(i)).collect();
        let predictions = model.predict_table(&test)?;
        let generalization = !setting.trains_on(seed);
        if generalization {
            confusion_total.add(&predictions, &labels);
        }
        records.push(FoldRecord {
            fold,
            test_seed: seed,
            n_test: labels.len(),
            accuracy: accuracy(&predictions, &labels),
            generalization,
        });
    }
    Ok(FoldOutcome {
        records,
        confusion: confusion_total,
        importances: mask.expand(&model.importances),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature: String,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Median importance per feature over every fold of every report, ranked
/// from most to least important. Features missing from a report count as 0.
pub fn importance_report(reports: &[&EvaluationReport]) -> Vec<ImportanceRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut samples: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let vectors: usize = reports.iter().map(|r| r.importances.len()).sum();
    let mut seen = 0;
    for report in reports {
        for vector in &report.importances {
            for (name, &v) in report.feature_names.iter().zip(vector) {
                let entry = samples.entry(name).or_insert_with(|| {
                    order.push(name);
                    vec![0.0; seen]
                });
                entry.push(v);
            }
            seen += 1;
            for entry in samples.values_mut() {
                entry.resize(seen, 0.0);
            }
        }
    }
    debug_assert!(samples.values().all(|v| v.len() == vectors));
    let mut rows: Vec<ImportanceRow> = order
        .iter()
        .map(|&name| {
            let v = &samples[name];
            ImportanceRow {
                feature: name.to_string(),
                median: quantile(v, 0.5),
                q25: quantile(v, 0.25),
                q75: quantile(v, 0.75),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.median.total_cmp(&a.median));
    rows
}
