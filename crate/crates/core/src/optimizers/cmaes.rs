//! CMA-ES with rank-one and rank-μ covariance updates and cumulative step-size
//! adaptation, using the standard default learning rates.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{argsort, Evaluator, Optimizer, Population};
use crate::error::Result;

pub const INITIAL_SIGMA: f64 = 2.0;
pub const EIGEN_FLOOR: f64 = 1e-14;

pub struct Cmaes {
    lambda: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    pc: DVector<f64>,
    ps: DVector<f64>,
    basis: DMatrix<f64>,
    axis_lengths: DVector<f64>,
    generation: usize,
}

impl Cmaes {
    /// Start from the centroid of `initial` with `σ = 2` and `C = I`.
    pub fn new(initial: &Population, lambda: usize) -> Self {
        let n = initial.dimension;
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = f64::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * f64::max(0.0, ((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

        let mut mean = DVector::zeros(n);
        for i in 0..initial.len() {
            mean += DVector::from_column_slice(initial.row(i));
        }
        mean /= initial.len() as f64;

        Self {
            lambda,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean,
            sigma: INITIAL_SIGMA,
            cov: DMatrix::identity(n, n),
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            basis: DMatrix::identity(n, n),
            axis_lengths: DVector::from_element(n, 1.0),
            generation: 0,
        }
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Eigendecomposition of `C`, flooring eigenvalues so sampling stays
    /// well defined after an ill-conditioned update.
    fn decompose(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let mut values = eig.eigenvalues;
        if values.iter().any(|&v| !(v > EIGEN_FLOOR)) {
            warn!("CMA-ES covariance lost positive definiteness; flooring eigenvalues at {EIGEN_FLOOR:e}");
            for v in values.iter_mut() {
                if !(*v > EIGEN_FLOOR) {
                    *v = EIGEN_FLOOR;
                }
            }
            self.cov = &eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.transpose();
        } else {
            self.cov = sym;
        }
        self.axis_lengths = values.map(f64::sqrt);
        self.basis = eig.eigenvectors;
    }

    fn inv_sqrt_times(&self, v: &DVector<f64>) -> DVector<f64> {
        let local = self.basis.transpose() * v;
        let scaled = local.component_div(&self.axis_lengths);
        &self.basis * scaled
    }
}

impl Optimizer for Cmaes {
    fn step(&mut self, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) -> Result<Population> {
        let n = self.mean.len();
        let nf = n as f64;
        let mut points = Vec::with_capacity(self.lambda * n);
        let mut fitness = Vec::with_capacity(self.lambda);
        for _ in 0..self.lambda {
            let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = &self.basis * z.component_mul(&self.axis_lengths);
            let mut x: Vec<f64> = (&self.mean + y * self.sigma).as_slice().to_vec();
            fitness.push(eval.eval(&mut x)?);
            points.extend_from_slice(&x);
        }
        let offspring = Population {
            dimension: n,
            points,
            fitness,
        };

        // recombination over the clipped (evaluated) offspring
        let order = argsort(&offspring.fitness);
        let old_mean = self.mean.clone();
        let steps: Vec<DVector<f64>> = order
            .iter()
            .take(self.weights.len())
            .map(|&i| (DVector::from_column_slice(offspring.row(i)) - &old_mean) / self.sigma)
            .collect();
        let mut mean_step = DVector::zeros(n);
        for (w, s) in self.weights.iter().zip(&steps) {
            mean_step += s * *w;
        }
        self.mean = &old_mean + &mean_step * self.sigma;

        self.ps = &self.ps * (1.0 - self.cs)
            + self.inv_sqrt_times(&mean_step) * (self.cs * (2.0 - self.cs) * self.mueff).sqrt();
        self.generation += 1;
        let ps_norm = self.ps.norm();
        let hsig_threshold = (1.4 + 2.0 / (nf + 1.0)) * self.chi_n;
        let hsig = ps_norm / (1.0 - (1.0 - self.cs).powi(2 * self.generation as i32)).sqrt() < hsig_threshold;
        let hsig_f = if hsig { 1.0 } else { 0.0 };
        self.pc = &self.pc * (1.0 - self.cc) + &mean_step * (hsig_f * (self.cc * (2.0 - self.cc) * self.mueff).sqrt());

        let mut rank_mu = DMatrix::zeros(n, n);
        for (w, s) in self.weights.iter().zip(&steps) {
            rank_mu += s * s.transpose() * *w;
        }
        let rank_one = &self.pc * self.pc.transpose();
        let correction = (1.0 - hsig_f) * self.cc * (2.0 - self.cc);
        self.cov = &self.cov * (1.0 - self.c1 - self.cmu)
            + (rank_one + &self.cov * correction) * self.c1
            + rank_mu * self.cmu;

        self.sigma *= ((self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();
        self.decompose();
        Ok(offspring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::make_instance;
    use crate::optimizers::{lhs_init, lhs_rng};
    use rand::SeedableRng;

    #[test]
    fn mean_is_weighted_recombination_of_best_offspring() {
        let inst = make_instance(8, 2, 3).unwrap();
        let mut eval = Evaluator::new(&inst, "t".into());
        let init = eval.eval_all(3, lhs_init(eval.domain(), 30, &mut lhs_rng(4))).unwrap();
        let mut es = Cmaes::new(&init, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let out = es.step(&mut rng, &mut eval).unwrap();
            // oracle: recombine from the logged population alone
            let order = argsort(&out.fitness);
            let mut expected = [0.0; 3];
            for (w, &i) in es.weights().iter().zip(&order) {
                for j in 0..3 {
                    expected[j] += w * out.row(i)[j];
                }
            }
            for j in 0..3 {
                assert!((es.mean()[j] - expected[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn initial_mean_is_centroid() {
        let inst = make_instance(1, 1, 3).unwrap();
        let mut eval = Evaluator::new(&inst, "t".into());
        let init = eval.eval_all(3, lhs_init(eval.domain(), 30, &mut lhs_rng(0))).unwrap();
        let es = Cmaes::new(&init, 30);
        for j in 0..3 {
            let c: f64 = (0..30).map(|i| init.row(i)[j]).sum::<f64>() / 30.0;
            assert!((es.mean()[j] - c).abs() < 1e-12);
        }
        assert_eq!(es.sigma(), INITIAL_SIGMA);
        assert!((es.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_covariance_is_repaired() {
        let inst = make_instance(1, 1, 3).unwrap();
        let mut eval = Evaluator::new(&inst, "t".into());
        let init = eval.eval_all(3, lhs_init(eval.domain(), 30, &mut lhs_rng(0))).unwrap();
        let mut es = Cmaes::new(&init, 30);
        es.cov = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        es.decompose();
        let eig = SymmetricEigen::new(es.covariance().clone());
        assert!(eig.eigenvalues.iter().all(|&v| v >= EIGEN_FLOOR * 0.5));
        assert!(es.axis_lengths.iter().all(|v| v.is_finite() && *v > 0.0));
    }
}
