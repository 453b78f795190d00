//! Checks shared by the structural and oracle suites and the acceptance
//! run. Each returns a one-line detail on success or failure.
#![allow(dead_code)]

use std::time::Instant;

use dynamorep::bbob::{make_instance, SearchDomain, NUM_CLASSES};
use dynamorep::ela::{explained_variance, meta_features, PooledSample};
use dynamorep::features::{iteration_stats, trajectory_features, IterationStats};
use dynamorep::forest::{ForestConfig, ForestModel};
use dynamorep::optimizers::{lhs_init, run, Algorithm, PopulationSnapshot, RunSpec, Trajectory};
use dynamorep::store::trajectory_csv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn desk_run(algorithm: Algorithm, pid: u8, iid: u32, seed: u64) -> Trajectory {
    let inst = make_instance(pid, iid, 3).unwrap();
    run(&RunSpec::new(algorithm, pid, iid, seed, 3), &inst).unwrap()
}

// ---------------------------------------------------------------- structural

pub fn feature_length() -> Check {
    let mut lengths = Vec::new();
    for algorithm in Algorithm::ALL {
        let v = trajectory_features(&desk_run(algorithm, 7, 1, 0)).unwrap();
        lengths.push(v.values.len());
        lengths.push(v.names().len());
    }
    ensure(lengths.iter().all(|&l| l == 480), format!("lengths {lengths:?}"))
}

pub fn order_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut checked = 0;
    for _ in 0..100 {
        let algorithm = Algorithm::ALL[rng.random_range(0..4)];
        let traj = desk_run(algorithm, rng.random_range(1..=24), rng.random_range(1..=100), rng.random_range(0..5));
        for snap in &traj.snapshots {
            let s = iteration_stats(snap).unwrap();
            for c in 0..s.min.len() {
                if !(s.min[c] <= s.mean[c] && s.mean[c] <= s.max[c] && s.std[c] >= 0.0) {
                    return Err(format!("{} iteration {} component {c}: {s:?}", traj.spec.label(), snap.iteration));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (iteration, component) pairs"))
}

/// Every one of the `n` equal-width strata of each axis holds exactly one point.
pub fn lhs_stratified() -> Check {
    let domain = SearchDomain::bbob(3);
    for seed in 0..200u64 {
        let n = 30;
        let pts = lhs_init(&domain, n, &mut ChaCha8Rng::seed_from_u64(seed));
        for j in 0..3 {
            let mut hits = vec![0; n];
            for i in 0..n {
                let u = (pts[i * 3 + j] + 5.0) / 10.0 * n as f64;
                hits[(u.floor() as usize).min(n - 1)] += 1;
            }
            if hits.iter().any(|&h| h != 1) {
                return Err(format!("seed {seed} axis {j}: {hits:?}"));
            }
        }
    }
    Ok("200 designs x 3 axes x 30 strata".into())
}

pub fn trajectory_bytes_deterministic() -> Check {
    for algorithm in Algorithm::ALL {
        let a = trajectory_csv(&desk_run(algorithm, 15, 4, 2), "# h").unwrap();
        let b = trajectory_csv(&desk_run(algorithm, 15, 4, 2), "# h").unwrap();
        if a != b {
            return Err(format!("{algorithm} bytes differ"));
        }
    }
    Ok("4 algorithms, identical bytes on rerun".into())
}

/// DE keeps the better of target and trial, so the best fitness of each
/// logged population never increases.
pub fn de_monotone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..100 {
        let traj = desk_run(Algorithm::DE, rng.random_range(1..=24), rng.random_range(1..=1000), rng.random_range(0..1000));
        let best: Vec<f64> = traj
            .snapshots
            .iter()
            .map(|s| s.fitness.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        if best.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("{} best-so-far increases: {best:?}", traj.spec.label()));
        }
    }
    Ok("100 random runs".into())
}

pub fn optimum_values() -> Check {
    let mut worst: f64 = 0.0;
    for pid in 1..=NUM_CLASSES {
        for iid in 1..=10 {
            let inst = make_instance(pid, iid, 3).unwrap();
            let err = (inst.evaluate(inst.x_opt.as_slice()).unwrap() - inst.f_opt).abs();
            worst = worst.max(err);
        }
    }
    ensure(worst <= 1e-8, format!("max |f(x_opt) - f_opt| = {worst:e}"))
}

// ---------------------------------------------------------------- oracles

fn brute_stats(snap: &PopulationSnapshot) -> IterationStats {
    let (n, d) = (snap.len(), snap.dimension);
    let column = |c: usize| -> Vec<f64> {
        (0..n)
            .map(|i| if c < d { snap.points[i * d + c] } else { snap.fitness[i] })
            .collect()
    };
    let mut s = IterationStats {
        iteration: snap.iteration,
        min: vec![],
        max: vec![],
        mean: vec![],
        std: vec![],
    };
    for c in 0..=d {
        let v = column(c);
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        s.min.push(v.iter().copied().fold(f64::INFINITY, f64::min));
        s.max.push(v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        s.mean.push(mean);
        s.std.push(var.sqrt());
    }
    s
}

pub fn iteration_stats_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let n = rng.random_range(1..=60);
        let d = rng.random_range(1..=6);
        let scale = [1.0, 5.0, 100.0][k % 3];
        let snap = PopulationSnapshot {
            iteration: k,
            dimension: d,
            points: (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect(),
            fitness: (0..n).map(|_| rng.random_range(-scale..scale)).collect(),
        };
        let got = iteration_stats(&snap).unwrap();
        let want = brute_stats(&snap);
        let pairs = [(&got.min, &want.min), (&got.max, &want.max), (&got.mean, &want.mean), (&got.std, &want.std)];
        for (g, w) in pairs {
            for (a, b) in g.iter().zip(w.iter()) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    ensure(worst <= 1e-12, format!("1000 snapshots, max scaled error {worst:e}"))
}

fn get(features: &[(String, f64)], name: &str) -> f64 {
    features.iter().find(|(n, _)| n == name).map(|f| f.1).unwrap()
}

pub fn meta_linear_r2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let points: Vec<f64> = (0..900 * 3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let coef: Vec<f64> = (0..4).map(|_| rng.random_range(-10.0..10.0)).collect();
        let fitness = points
            .chunks(3)
            .map(|x| coef[0] + coef[1] * x[0] + coef[2] * x[1] + coef[3] * x[2])
            .collect();
        let sample = PooledSample {
            dimension: 3,
            points,
            fitness,
        };
        let r2 = get(&meta_features(&sample), "ela_meta.lin_simple.adj_r2");
        worst = worst.max((r2 - 1.0).abs());
    }
    ensure(worst <= 1e-9, format!("20 linear targets, max |adj R2 - 1| = {worst:e}"))
}

pub fn pca_sums() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut worst: f64 = 0.0;
    for algorithm in Algorithm::ALL {
        let traj = desk_run(algorithm, rng.random_range(1..=24), 1, 0);
        let sample = dynamorep::ela::pool_trajectory(&traj);
        for include_y in [false, true] {
            for correlation in [false, true] {
                if let Some(ev) = explained_variance(&sample, include_y, correlation) {
                    worst = worst.max((ev.iter().sum::<f64>() - 1.0).abs());
                    if ev.iter().any(|&v| v < 0.0) {
                        return Err(format!("negative share {ev:?}"));
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-9, format!("max |sum - 1| = {worst:e}"))
}

pub fn blobs(n_per: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (label, center) in [(1u8, -5.0), (2u8, 5.0)] {
        for _ in 0..n_per {
            x.extend([center + noise.sample(&mut rng), center + noise.sample(&mut rng)]);
            y.push(label);
        }
    }
    (x, y)
}

/// Four clusters on the corners of a square; diagonal corners share a label.
pub fn xor(n_per: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (cx, cy) in [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)] {
        for _ in 0..n_per {
            x.extend([cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
            y.push(if cx * cy > 0.0 { 1 } else { 2 });
        }
    }
    (x, y)
}

fn train_accuracy(x: &[f64], y: &[u8]) -> f64 {
    let model = ForestModel::fit(x, 2, y, &ForestConfig::default()).unwrap();
    let pred = model.predict(x).unwrap();
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

pub fn forest_blobs_and_xor() -> Check {
    let (x, y) = blobs(100, 1);
    let blob_acc = train_accuracy(&x, &y);
    let (x, y) = xor(25, 3);
    let xor_acc = train_accuracy(&x, &y);
    ensure(
        blob_acc == 1.0 && xor_acc >= 0.95,
        format!("blobs {blob_acc}, xor {xor_acc}"),
    )
}

// ---------------------------------------------------------------- timing

/// Mean DynamoRep extraction time over pre-generated desk trajectories.
pub fn extraction_time(trajectories: &[Trajectory]) -> (f64, Check) {
    let start = Instant::now();
    let mut total = 0.0;
    for t in trajectories {
        total += trajectory_features(t).unwrap().values[0];
    }
    let per = start.elapsed().as_secs_f64() / trajectories.len() as f64;
    std::hint::black_box(total);
    (
        per,
        ensure(per <= 0.02, format!("{:.3e} s per trajectory over {}", per, trajectories.len())),
    )
}

pub fn sample_trajectories(count: usize) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    (0..count)
        .map(|_| {
            desk_run(
                Algorithm::ALL[rng.random_range(0..4)],
                rng.random_range(1..=24),
                rng.random_range(1..=100),
                rng.random_range(0..5),
            )
        })
        .collect()
}
