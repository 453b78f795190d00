use nalgebra::{DMatrix, SymmetricEigen};

use super::{NamedFeatures, PooledSample};

const TARGET_SHARE: f64 = 0.9;

/// Proportion of variance carried by each principal component, sorted in
/// decreasing order. `None` when the matrix is undefined (zero total
/// variance, or a constant column under the correlation version).
pub fn explained_variance(sample: &PooledSample, include_y: bool, correlation: bool) -> Option<Vec<f64>> {
    let d = sample.dimension;
    let n = sample.len();
    let p = if include_y { d + 1 } else { d };
    if n < 2 || p == 0 {
        return None;
    }
    let value = |i: usize, c: usize| if c < d { sample.points[i * d + c] } else { sample.fitness[i] };
    let means: Vec<f64> = (0..p).map(|c| (0..n).map(|i| value(i, c)).sum::<f64>() / n as f64).collect();
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for i in 0..n {
        for a in 0..p {
            let da = value(i, a) - means[a];
            for b in a..p {
                cov[(a, b)] += da * (value(i, b) - means[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            cov[(a, b)] /= (n - 1) as f64;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    if correlation {
        let sd: Vec<f64> = (0..p).map(|a| cov[(a, a)].sqrt()).collect();
        if sd.iter().any(|&s| !(s > 0.0)) {
            return None;
        }
        for a in 0..p {
            for b in 0..p {
                cov[(a, b)] /= sd[a] * sd[b];
            }
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Some(values.into_iter().map(|v| v / total).collect())
}

fn share_needed(proportions: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (k, v) in proportions.iter().enumerate() {
        acc += v;
        if acc >= TARGET_SHARE - 1e-12 {
            return (k + 1) as f64 / proportions.len() as f64;
        }
    }
    1.0
}

/// Fraction of components needed for 90% of the variance, and the first
/// component's share, for covariance/correlation of `X` and of `[X | y]`.
pub fn pca_features(sample: &PooledSample) -> NamedFeatures {
    let variants = [
        ("cov_x", false, false),
        ("cor_x", false, true),
        ("cov_init", true, false),
        ("cor_init", true, true),
    ];
    let spectra: Vec<Option<Vec<f64>>> = variants
        .iter()
        .map(|&(_, with_y, cor)| explained_variance(sample, with_y, cor))
        .collect();
    let mut out = Vec::with_capacity(8);
    for ((tag, _, _), s) in variants.iter().zip(&spectra) {
        out.push((format!("pca.expl_var.{tag}"), s.as_deref().map_or(f64::NAN, share_needed)));
    }
    for ((tag, _, _), s) in variants.iter().zip(&spectra) {
        out.push((format!("pca.expl_var_PC1.{tag}"), s.as_ref().map_or(f64::NAN, |v| v[0])));
    }
    out
}
