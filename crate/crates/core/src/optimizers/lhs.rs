use rand::seq::SliceRandom;
use rand::Rng;

use crate::bbob::SearchDomain;

/// Latin hypercube sample of `n` points, row-major. Along every axis the
/// domain is cut into `n` equal strata and each stratum receives exactly one
/// point, placed uniformly within it.
pub fn lhs_init<R: Rng + ?Sized>(domain: &SearchDomain, n: usize, rng: &mut R) -> Vec<f64> {
    let d = domain.dimension();
    let mut points = vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(rng);
        let (lo, hi) = (domain.lower[j], domain.upper[j]);
        let width = (hi - lo) / n as f64;
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            // min() guards the rounding edge where lo + n*width lands past hi
            points[i * d + j] = (lo + (s as f64 + u) * width).min(hi);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_per_stratum(points: &[f64], n: usize, d: usize) -> bool {
        (0..d).all(|j| {
            let mut seen = vec![false; n];
            for i in 0..n {
                let v = points[i * d + j];
                let s = (((v + 5.0) / 10.0) * n as f64).floor().min((n - 1) as f64) as usize;
                if seen[s] {
                    return false;
                }
                seen[s] = true;
            }
            seen.iter().all(|&b| b)
        })
    }

    #[test]
    fn single_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = lhs_init(&SearchDomain::bbob(1), 1, &mut rng);
        assert_eq!(p.len(), 1);
        assert!((-5.0..=5.0).contains(&p[0]));
    }

    #[test]
    fn stratified_and_deterministic() {
        for seed in 0..50 {
            let a = lhs_init(&SearchDomain::bbob(3), 30, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = lhs_init(&SearchDomain::bbob(3), 30, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(a, b);
            assert!(one_per_stratum(&a, 30, 3));
        }
    }
}
