use super::{ratio_or_nan, NamedFeatures, PooledSample};
use crate::optimizers::argsort;

pub const DISP_QUANTILES: [f64; 4] = [0.02, 0.05, 0.10, 0.25];

fn pairwise_distances(sample: &PooledSample, rows: &[usize]) -> Vec<f64> {
    let m = rows.len();
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for a in 0..m {
        let ra = sample.row(rows[a]);
        for &b in &rows[a + 1..] {
            let rb = sample.row(b);
            let sq: f64 = ra.iter().zip(rb).map(|(p, q)| (p - q) * (p - q)).sum();
            out.push(sq.sqrt());
        }
    }
    out
}

/// Mean and median; NaN for an empty slice. Reorders `values`.
fn mean_median(values: &mut [f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    let median = if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    (mean, median)
}

/// Number of best points kept for quantile `q` of `n` points.
pub(crate) fn subset_size(q: f64, n: usize) -> usize {
    // the small epsilon stops 0.02 * 900 = 18.000000000000004 rounding up
    ((q * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Dispersion of the best `q` fraction of the sample relative to the whole
/// sample, by mean and median pairwise Euclidean distance.
pub fn disp_features(sample: &PooledSample) -> NamedFeatures {
    let n = sample.len();
    let all: Vec<usize> = (0..n).collect();
    let (full_mean, full_median) = mean_median(&mut pairwise_distances(sample, &all));
    let order = argsort(&sample.fitness);

    let mut ratio_mean = Vec::new();
    let mut ratio_median = Vec::new();
    let mut diff_mean = Vec::new();
    let mut diff_median = Vec::new();
    for q in DISP_QUANTILES {
        let tag = format!("{:02}", (q * 100.0).round() as u32);
        let size = subset_size(q, n);
        let (m, med) = if size < 2 {
            (f64::NAN, f64::NAN)
        } else {
            mean_median(&mut pairwise_distances(sample, &order[..size]))
        };
        ratio_mean.push((format!("disp.ratio_mean_{tag}"), ratio_or_nan(m, full_mean)));
        ratio_median.push((format!("disp.ratio_median_{tag}"), ratio_or_nan(med, full_median)));
        diff_mean.push((format!("disp.diff_mean_{tag}"), m - full_mean));
        diff_median.push((format!("disp.diff_median_{tag}"), med - full_median));
    }
    ratio_mean
        .into_iter()
        .chain(ratio_median)
        .chain(diff_mean)
        .chain(diff_median)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn get(f: &NamedFeatures, name: &str) -> f64 {
        f.iter().find(|(n, _)| n == name).unwrap().1
    }

    #[test]
    fn subset_sizes() {
        assert_eq!(subset_size(0.25, 900), 225);
        assert_eq!(subset_size(0.02, 900), 18);
        assert_eq!(subset_size(0.05, 900), 45);
        assert_eq!(subset_size(0.10, 900), 90);
        assert_eq!(subset_size(0.02, 10), 1);
    }

    #[test]
    fn identical_points() {
        let sample = PooledSample {
            dimension: 2,
            points: vec![1.5; 200],
            fitness: (0..100).map(|i| i as f64).collect(),
        };
        let f = disp_features(&sample);
        assert_eq!(f.len(), 16);
        for (name, v) in &f {
            if name.contains("ratio") {
                assert!(v.is_nan(), "{name}");
            } else {
                assert_eq!(*v, 0.0, "{name}");
            }
        }
    }

    #[test]
    fn too_few_points_is_missing() {
        let sample = PooledSample {
            dimension: 1,
            points: (0..20).map(|i| i as f64).collect(),
            fitness: (0..20).map(|i| i as f64).collect(),
        };
        let f = disp_features(&sample);
        assert!(get(&f, "disp.ratio_mean_02").is_nan());
        assert!(get(&f, "disp.diff_median_05").is_nan());
        assert!(get(&f, "disp.ratio_mean_25").is_finite());
    }

    #[test]
    fn best_points_in_tight_cluster() {
        // two clusters; the low-fitness one is tight
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut points = Vec::new();
        let mut fitness = Vec::new();
        for i in 0..500 {
            let (centre, spread, base) = if i < 250 { (-3.0, 0.05, 0.0) } else { (3.0, 1.0, 10.0) };
            points.push(centre + rng.random_range(-spread..spread));
            points.push(centre + rng.random_range(-spread..spread));
            fitness.push(base + rng.random::<f64>());
        }
        let sample = PooledSample { dimension: 2, points, fitness };
        let f = disp_features(&sample);

        // brute-force oracle for the 2% subset
        let order = argsort(&sample.fitness);
        let best = &order[..10];
        let mut dists = Vec::new();
        for a in 0..best.len() {
            for b in a + 1..best.len() {
                let (p, q) = (sample.row(best[a]), sample.row(best[b]));
                dists.push(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        let mut full = Vec::new();
        for a in 0..500 {
            for b in a + 1..500 {
                let (p, q) = (sample.row(a), sample.row(b));
                full.push(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        let best_mean = dists.iter().sum::<f64>() / dists.len() as f64;
        let full_mean = full.iter().sum::<f64>() / full.len() as f64;
        let ratio = get(&f, "disp.ratio_mean_02");
        assert!((ratio - best_mean / full_mean).abs() < 1e-12);
        assert!(ratio < 1.0);
        assert!((get(&f, "disp.diff_mean_02") - (best_mean - full_mean)).abs() < 1e-12);

        full.sort_by(f64::total_cmp);
        let mid = full.len() / 2;
        let full_median = if full.len() % 2 == 0 { 0.5 * (full[mid - 1] + full[mid]) } else { full[mid] };
        dists.sort_by(f64::total_cmp);
        let best_median = dists[22];
        assert!((get(&f, "disp.ratio_median_02") - best_median / full_median).abs() < 1e-12);
    }
}
