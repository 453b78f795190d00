//! Stage orchestration: run generation, featurization, evaluation and
//! report emission, either against files or fully in memory.

use rayon::prelude::*;

use crate::bbob::{make_instance, ProblemInstance, NUM_CLASSES};
use crate::config::ExperimentConfig;
use crate::ela::{ela_feature_names, trajectory_ela};
use crate::error::Result;
use crate::experiments::{evaluate, stratified_folds, EvaluationReport, FeatureKind, Setting};
use crate::features::{feature_names, trajectory_features, RunKey};
use crate::optimizers::{run, Algorithm, RunSpec, Trajectory};
use crate::table::FeatureTable;

/// Every problem instance a config touches, indexed by
/// `(problem_id - 1) * instances + instance_id - 1`.
pub struct InstanceSet {
    instances: u32,
    items: Vec<ProblemInstance>,
}

impl InstanceSet {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let pairs: Vec<(u8, u32)> = (1..=NUM_CLASSES)
            .flat_map(|p| (1..=config.instances).map(move |i| (p, i)))
            .collect();
        let items = pairs
            .par_iter()
            .map(|&(p, i)| make_instance(p, i, config.dimension))
            .collect::<Result<_>>()?;
        Ok(Self {
            instances: config.instances,
            items,
        })
    }

    pub fn get(&self, problem_id: u8, instance_id: u32) -> &ProblemInstance {
        &self.items[(problem_id as usize - 1) * self.instances as usize + instance_id as usize - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProblemInstance> {
        self.items.iter()
    }
}

pub fn run_one(spec: &RunSpec, instances: &InstanceSet) -> Result<Trajectory> {
    run(spec, instances.get(spec.problem_id, spec.instance_id))
}

pub fn empty_table(config: &ExperimentConfig, kind: FeatureKind) -> FeatureTable {
    match kind {
        FeatureKind::DynamoRep => FeatureTable::new(feature_names(config.dimension, config.iterations)),
        FeatureKind::Ela => FeatureTable::new(ela_feature_names()),
    }
}

/// Features of one trajectory for the requested kind.
pub fn featurize(trajectory: &Trajectory, kind: FeatureKind) -> Result<Vec<f64>> {
    Ok(match kind {
        FeatureKind::DynamoRep => trajectory_features(trajectory)?.values,
        FeatureKind::Ela => trajectory_ela(trajectory).values,
    })
}

/// Run and featurize every run of one algorithm without touching disk.
/// Returns one table per requested kind, rows in key order.
pub fn tables_in_memory(
    config: &ExperimentConfig,
    instances: &InstanceSet,
    algorithm: Algorithm,
    kinds: &[FeatureKind],
) -> Result<Vec<FeatureTable>> {
    let specs = config.runs(algorithm);
    let rows: Vec<(RunKey, Vec<Vec<f64>>)> = specs
        .par_iter()
        .map(|spec| {
            let trajectory = run_one(spec, instances)?;
            let values = kinds
                .iter()
                .map(|&k| featurize(&trajectory, k))
                .collect::<Result<_>>()?;
            Ok((RunKey::from(spec), values))
        })
        .collect::<Result<_>>()?;
    let mut tables: Vec<FeatureTable> = kinds.iter().map(|&k| empty_table(config, k)).collect();
    for (key, values) in rows {
        for (table, v) in tables.iter_mut().zip(values) {
            table.push(key, &v)?;
        }
    }
    Ok(tables)
}

/// Setting one for every train seed, then setting two for every held-out seed.
pub fn evaluate_table(
    config: &ExperimentConfig,
    table: &FeatureTable,
    kind: FeatureKind,
) -> Result<Vec<EvaluationReport>> {
    let plan = stratified_folds(config.instances, config.folds)?;
    let forest = config.forest();
    settings(config)
        .par_iter()
        .map(|&s| evaluate(table, &plan, s, kind, &forest))
        .collect()
}

// ---------------------------------------------------------------- file stages

use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::experiments::{importance_report, summarize};
use crate::features::{component_name, parse_feature_name};
use crate::store::{self, CsvDoc, Meta};

pub fn instances_path(root: &Path) -> PathBuf {
    root.join("instances.csv")
}

pub fn features_path(root: &Path, kind: FeatureKind, algorithm: Algorithm) -> PathBuf {
    root.join("features").join(format!("{kind}_{algorithm}.csv"))
}

pub fn report_path(root: &Path, kind: FeatureKind, algorithm: Algorithm, setting: Setting) -> PathBuf {
    root.join("reports").join(kind.as_str()).join(format!(
        "{algorithm}_setting{}_seed{}.json",
        setting.number(),
        setting.seed()
    ))
}

pub fn plot_dir(root: &Path) -> PathBuf {
    root.join("report")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerateSummary {
    pub written: usize,
    pub skipped: usize,
}

/// Run every configured optimizer run and write one trajectory file per
/// run. Complete files from an earlier call are kept untouched.
pub fn cmd_generate(config: &ExperimentConfig) -> Result<GenerateSummary> {
    config.validate()?;
    let root = &config.output_dir;
    std::fs::create_dir_all(root)?;
    let header = config.header_line();
    config.with_pool(|| {
        let instances = InstanceSet::build(config)?;
        store::write_instances(
            &instances_path(root),
            instances.iter(),
            config.dimension,
            &header,
        )?;
        let specs: Vec<RunSpec> = config
            .algorithms
            .iter()
            .flat_map(|&a| config.runs(a))
            .collect();
        let rows = config.population * config.iterations;
        let written: Vec<bool> = specs
            .par_iter()
            .map(|spec| {
                let path = store::trajectory_path(root, &RunKey::from(spec));
                if store::trajectory_complete(&path, &header, rows) {
                    return Ok(false);
                }
                let trajectory = run_one(spec, &instances)?;
                store::write_trajectory(&path, &trajectory, &header)?;
                Ok(true)
            })
            .collect::<Result<_>>()?;
        let n = written.iter().filter(|&&w| w).count();
        Ok(GenerateSummary {
            written: n,
            skipped: written.len() - n,
        })
    })?
}

/// Read trajectories and write one feature table per algorithm.
pub fn cmd_featurize(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let root = &config.output_dir;
    let kind = config.feature_kind;
    let header = config.header_line();
    config.with_pool(|| {
        let mut written = Vec::new();
        for &algorithm in &config.algorithms {
            let specs = config.runs(algorithm);
            let rows: Vec<(RunKey, Vec<f64>)> = specs
                .par_iter()
                .map(|spec| {
                    let key = RunKey::from(spec);
                    let path = store::trajectory_path(root, &key);
                    if !path.exists() {
                        return Err(Error::MissingInput {
                            stage: "generate",
                            path,
                        });
                    }
                    let trajectory = store::read_trajectory(&path)?;
                    if trajectory.spec != *spec {
                        return Err(Error::Malformed {
                            path,
                            message: "trajectory does not match the configured run".into(),
                        });
                    }
                    Ok((key, featurize(&trajectory, kind)?))
                })
                .collect::<Result<_>>()?;
            let mut table = empty_table(config, kind);
            for (key, values) in rows {
                table.push(key, &values)?;
            }
            let path = features_path(root, kind, algorithm);
            store::write_table(&path, &table, &header)?;
            written.push(path);
        }
        Ok(written)
    })?
}

fn read_features(config: &ExperimentConfig, kind: FeatureKind, algorithm: Algorithm) -> Result<FeatureTable> {
    let path = features_path(&config.output_dir, kind, algorithm);
    if !path.exists() {
        return Err(Error::MissingInput {
            stage: "featurize",
            path,
        });
    }
    store::read_table(&path)
}

/// Evaluate both settings for every algorithm and write one JSON per
/// (algorithm, setting, seed).
pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let kind = config.feature_kind;
    let meta = Meta::new(config);
    config.with_pool(|| {
        let mut written = Vec::new();
        for &algorithm in &config.algorithms {
            let table = read_features(config, kind, algorithm)?;
            for report in evaluate_table(config, &table, kind)? {
                let path = report_path(&config.output_dir, kind, algorithm, report.setting);
                store::write_report(&path, &report, &meta)?;
                written.push(path);
            }
        }
        Ok(written)
    })?
}

fn settings(config: &ExperimentConfig) -> Vec<Setting> {
    let mut out: Vec<Setting> = config
        .seeds
        .iter()
        .map(|&train_seed| Setting::One { train_seed })
        .collect();
    if config.seeds.len() > 1 {
        out.extend(config.seeds.iter().map(|&test_seed| Setting::Two { test_seed }));
    }
    out
}

/// Reports of one kind for every algorithm, in config order.
pub fn read_reports(config: &ExperimentConfig, kind: FeatureKind) -> Result<Vec<EvaluationReport>> {
    let mut out = Vec::new();
    for &algorithm in &config.algorithms {
        for setting in settings(config) {
            let path = report_path(&config.output_dir, kind, algorithm, setting);
            if !path.exists() {
                return Err(Error::MissingInput {
                    stage: "evaluate",
                    path,
                });
            }
            out.push(store::read_report(&path)?.report);
        }
    }
    Ok(out)
}

/// Write the plot-ready tables derived from reports of the configured
/// feature kind: accuracy summaries and boxes, per-algorithm error
/// confusion, importance rankings and the per-run feature curves.
pub fn cmd_report(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let kind = config.feature_kind;
    let reports = read_reports(config, kind)?;
    let header = config.header_line();
    let dir = plot_dir(&config.output_dir);
    let mut written = Vec::new();
    let suffix = match kind {
        FeatureKind::DynamoRep => String::new(),
        FeatureKind::Ela => "_ela".to_string(),
    };

    let path = dir.join(format!("table1_summary{suffix}.csv"));
    summary_csv(&reports, &header)?.save(&path)?;
    written.push(path);

    let path = dir.join(format!("accuracy_boxes{suffix}.csv"));
    accuracy_boxes_csv(&reports, &header)?.save(&path)?;
    written.push(path);

    for &algorithm in &config.algorithms {
        let mut total = crate::experiments::Confusion::default();
        for r in reports.iter().filter(|r| r.algorithm == algorithm && r.setting.number() == 2) {
            total.merge(&r.confusion);
        }
        let path = dir.join(format!("confusion_{algorithm}{suffix}.csv"));
        store::write_confusion(&path, &total.errors_only(), &header)?;
        written.push(path);

        let own: Vec<&EvaluationReport> = setting_two(&reports).filter(|r| r.algorithm == algorithm).collect();
        let path = dir.join(format!("importance_{algorithm}{suffix}.csv"));
        store::write_importances(&path, &importance_report(&own), &header)?;
        written.push(path);
    }

    let pooled: Vec<&EvaluationReport> = setting_two(&reports).collect();
    let ranking = importance_report(&pooled);
    let top = &ranking[..ranking.len().min(30)];
    let path = dir.join(format!("importance_top30{suffix}.csv"));
    store::write_importances(&path, top, &header)?;
    written.push(path);

    if kind == FeatureKind::DynamoRep {
        let path = dir.join("fig1_features.csv");
        fig1_csv(config, &header)?.save(&path)?;
        written.push(path);
    }
    let other = match kind {
        FeatureKind::DynamoRep => FeatureKind::Ela,
        FeatureKind::Ela => FeatureKind::DynamoRep,
    };
    if let Ok(other_reports) = read_reports(config, other) {
        let (mut both, rest) = match kind {
            FeatureKind::DynamoRep => (reports, other_reports),
            FeatureKind::Ela => (other_reports, reports),
        };
        both.extend(rest);
        let path = dir.join("table2_summary.csv");
        summary_csv(&both, &header)?.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

fn setting_two(reports: &[EvaluationReport]) -> impl Iterator<Item = &EvaluationReport> {
    reports.iter().filter(|r| r.setting.number() == 2)
}

/// One row per (feature kind, algorithm, setting) pooling every
/// generalization accuracy of that group.
pub fn summary_csv(reports: &[EvaluationReport], header: &str) -> Result<CsvDoc> {
    let columns = ["feature_kind", "algorithm", "setting", "n", "mean", "median", "std"].map(String::from);
    let mut doc = CsvDoc::new(header, &columns)?;
    let mut groups: Vec<(FeatureKind, Algorithm, u8)> = Vec::new();
    for r in reports {
        let g = (r.feature_kind, r.algorithm, r.setting.number());
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for (kind, algorithm, setting) in groups {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| r.feature_kind == kind && r.algorithm == algorithm && r.setting.number() == setting)
            .flat_map(|r| r.generalization_accuracies())
            .collect();
        let s = summarize(&values);
        doc.row([
            kind.to_string(),
            algorithm.to_string(),
            setting.to_string(),
            s.n.to_string(),
            store::format_f64(s.mean),
            store::format_f64(s.median),
            store::format_f64(s.std),
        ])?;
    }
    Ok(doc)
}

/// Every per-fold accuracy, for boxplots per train and test seed.
pub fn accuracy_boxes_csv(reports: &[EvaluationReport], header: &str) -> Result<CsvDoc> {
    let columns = [
        "feature_kind",
        "algorithm",
        "setting",
        "seed",
        "fold",
        "test_seed",
        "accuracy",
        "generalization",
    ]
    .map(String::from);
    let mut doc = CsvDoc::new(header, &columns)?;
    for r in reports {
        for rec in &r.per_fold {
            doc.row([
                r.feature_kind.to_string(),
                r.algorithm.to_string(),
                r.setting.number().to_string(),
                r.setting.seed().to_string(),
                rec.fold.to_string(),
                rec.test_seed.to_string(),
                store::format_f64(rec.accuracy),
                rec.generalization.to_string(),
            ])?;
        }
    }
    Ok(doc)
}

/// Long-form DynamoRep curves of instance 1 of every class for the first
/// configured algorithm and seed.
pub fn fig1_csv(config: &ExperimentConfig, header: &str) -> Result<CsvDoc> {
    let algorithm = config.algorithms[0];
    let seed = config.seeds[0];
    let table = read_features(config, FeatureKind::DynamoRep, algorithm)?;
    let columns = [
        "algorithm",
        "problem_id",
        "instance_id",
        "seed",
        "iteration",
        "statistic",
        "component",
        "value",
    ]
    .map(String::from);
    let mut doc = CsvDoc::new(header, &columns)?;
    let d = config.dimension;
    for i in table.rows_where(|k| k.instance_id == 1 && k.seed == seed) {
        let key = table.keys[i];
        for (name, &v) in table.names.iter().zip(table.row(i)) {
            let (t, stat, c) = parse_feature_name(name, d).ok_or_else(|| Error::Stage {
                stage: "report",
                message: format!("unrecognised feature column {name:?}"),
            })?;
            doc.row([
                key.algorithm.to_string(),
                key.problem_id.to_string(),
                key.instance_id.to_string(),
                key.seed.to_string(),
                t.to_string(),
                stat.to_string(),
                component_name(c, d),
                store::format_f64(v),
            ])?;
        }
    }
    Ok(doc)
}

/// Every stage in order.
pub fn cmd_all(config: &ExperimentConfig) -> Result<()> {
    cmd_generate(config)?;
    cmd_featurize(config)?;
    cmd_evaluate(config)?;
    cmd_report(config)?;
    Ok(())
}
