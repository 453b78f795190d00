use dynamorep::experiments::*;
use dynamorep::features::RunKey;
use dynamorep::forest::ForestConfig;
use dynamorep::optimizers::Algorithm;
use dynamorep::table::FeatureTable;
use proptest::prelude::*;

/// One row per (class, instance, seed). Column 0 is the label itself, so a
/// forest classifies perfectly; column 1 is a class-free counter.
fn oracle_table(instances: u32, seeds: &[u64]) -> FeatureTable {
    let mut t = FeatureTable::new(vec!["label".into(), "noise".into()]);
    let mut counter = 0.0;
    for pid in 1..=24u8 {
        for iid in 1..=instances {
            for &seed in seeds {
                let key = RunKey {
                    algorithm: Algorithm::DE,
                    problem_id: pid,
                    instance_id: iid,
                    seed,
                };
                counter += 1.0;
                t.push(key, &[pid as f64, (counter * 7.0) % 13.0]).unwrap();
            }
        }
    }
    t
}

fn small_forest() -> ForestConfig {
    ForestConfig {
        n_trees: 10,
        ..Default::default()
    }
}

#[test]
fn perfect_features_score_one() {
    let table = oracle_table(20, &[0, 1, 2]);
    let plan = stratified_folds(20, 10).unwrap();
    for setting in [Setting::One { train_seed: 1 }, Setting::Two { test_seed: 2 }] {
        let report = evaluate(&table, &plan, setting, FeatureKind::DynamoRep, &small_forest()).unwrap();
        assert!(report.per_fold.iter().all(|r| r.accuracy == 1.0));
        assert_eq!(report.summary.mean, 1.0);
        assert_eq!(report.confusion.errors_only().total(), 0);
    }
}

#[test]
fn setting_one_separates_own_seed() {
    let table = oracle_table(20, &[0, 1, 2]);
    let plan = stratified_folds(20, 10).unwrap();
    let report = setting_one(&table, &plan, 1, FeatureKind::DynamoRep, &small_forest()).unwrap();
    assert_eq!(report.per_fold.len(), 30);
    let own: Vec<_> = report.per_fold.iter().filter(|r| r.test_seed == 1).collect();
    assert_eq!(own.len(), 10);
    assert!(own.iter().all(|r| !r.generalization));
    assert_eq!(report.summary.n, 20);
    // 24 classes x 2 instances per fold x 2 generalization seeds x 10 folds.
    assert_eq!(report.confusion.total(), 24 * 2 * 2 * 10);
}

#[test]
fn setting_two_train_counts() {
    let seeds = [0, 1, 2, 3, 4];
    let table = oracle_table(20, &seeds);
    let plan = stratified_folds(20, 10).unwrap();
    let folds = row_folds(&table, &plan).unwrap();
    for j in 0..10 {
        let split = split_rows(&table, &folds, j, Setting::Two { test_seed: 3 });
        // 4 seeds x 0.9 N instances per class.
        assert_eq!(split.train.len(), 24 * 4 * 18);
        let per_class = split.train.iter().filter(|&&i| table.keys[i].problem_id == 7).count();
        assert_eq!(per_class, 4 * 18);
    }
    let report = setting_two(&table, &plan, 3, FeatureKind::DynamoRep, &small_forest()).unwrap();
    assert_eq!(report.generalization_accuracies().len(), 10);
    assert_eq!(report.confusion.total(), 24 * 20);
}

#[test]
fn folds_are_stratified_partitions() {
    for n in [10u32, 20, 100, 999, 1000] {
        let plan = stratified_folds(n, 10).unwrap();
        let mut covered = Vec::new();
        for j in 0..plan.k() {
            covered.extend(plan.test_ids(j));
        }
        assert_eq!(covered, (1..=n).collect::<Vec<_>>());
        let sizes: Vec<usize> = (0..10).map(|j| plan.test_ids(j).count()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn elimination_runs_per_fold() {
    let mut table = FeatureTable::new(vec!["label".into(), "constant".into(), "gappy".into()]);
    for pid in 1..=24u8 {
        for iid in 1..=10 {
            for seed in 0..2 {
                let key = RunKey {
                    algorithm: Algorithm::GA,
                    problem_id: pid,
                    instance_id: iid,
                    seed,
                };
                let gappy = if iid == 3 { f64::NAN } else { iid as f64 };
                table.push(key, &[pid as f64, 1.0, gappy]).unwrap();
            }
        }
    }
    let plan = stratified_folds(10, 10).unwrap();
    let report = setting_two(&table, &plan, 0, FeatureKind::Ela, &small_forest()).unwrap();
    assert_eq!(report.summary.mean, 1.0);
    for (j, imp) in report.importances.iter().enumerate() {
        assert_eq!(imp.len(), 3);
        assert_eq!(imp[1], 0.0);
        if j != 2 {
            // Column 2 has a missing value in every fold but the one testing instance 3.
            assert_eq!(imp[2], 0.0);
        }
    }
    // Without elimination the missing values reach the forest.
    assert!(setting_two(&table, &plan, 0, FeatureKind::DynamoRep, &small_forest()).is_err());
}

#[test]
fn importance_report_medians() {
    let table = oracle_table(10, &[0, 1]);
    let plan = stratified_folds(10, 10).unwrap();
    let a = setting_two(&table, &plan, 0, FeatureKind::DynamoRep, &small_forest()).unwrap();
    let mut same = a.clone();
    same.importances = vec![vec![0.75, 0.25]; 10];
    let rows = importance_report(&[&same, &same]);
    assert_eq!(rows[0].feature, "label");
    assert_eq!(rows[0].median, 0.75);
    assert_eq!(rows[1].median, 0.25);
    let again = importance_report(&[&a]);
    assert_eq!(again, importance_report(&[&a]));
}

#[test]
fn reports_are_deterministic() {
    let table = oracle_table(10, &[0, 1]);
    let plan = stratified_folds(10, 10).unwrap();
    let a = setting_one(&table, &plan, 0, FeatureKind::DynamoRep, &small_forest()).unwrap();
    let b = setting_one(&table, &plan, 0, FeatureKind::DynamoRep, &small_forest()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejects_bad_tables() {
    let plan = stratified_folds(10, 10).unwrap();
    let table = oracle_table(10, &[0]);
    assert!(setting_two(&table, &plan, 0, FeatureKind::DynamoRep, &small_forest()).is_err());
    assert!(setting_one(&table, &plan, 5, FeatureKind::DynamoRep, &small_forest()).is_err());
    let wide = oracle_table(20, &[0, 1]);
    assert!(setting_one(&wide, &plan, 0, FeatureKind::DynamoRep, &small_forest()).is_err());
}

proptest! {
    #[test]
    fn no_key_in_train_and_test(fold in 0usize..10, seed in 0u64..3, two in any::<bool>()) {
        let table = oracle_table(10, &[0, 1, 2]);
        let plan = stratified_folds(10, 10).unwrap();
        let folds = row_folds(&table, &plan).unwrap();
        let setting = if two { Setting::Two { test_seed: seed } } else { Setting::One { train_seed: seed } };
        let split = split_rows(&table, &folds, fold, setting);
        for (_, rows) in &split.test {
            for i in rows {
                prop_assert!(!split.train.contains(i));
                prop_assert!(plan.test_ids(fold).contains(&table.keys[*i].instance_id));
            }
        }
    }

    #[test]
    fn summary_bounds(values in proptest::collection::vec(0.0f64..1.0, 1..50)) {
        let s = summarize(&values);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-12 <= s.mean && s.mean <= hi + 1e-12);
        prop_assert!(lo <= s.median && s.median <= hi);
        prop_assert!(s.std >= 0.0);
    }
}
