//! Real-coded generational GA: binary tournament selection, simulated binary
//! crossover, polynomial mutation, one elite carried over.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argsort, Evaluator, Optimizer, Population};
use crate::bbob::SearchDomain;
use crate::error::Result;

pub const SBX_ETA: f64 = 15.0;
pub const SBX_PROB: f64 = 0.9;
pub const PM_ETA: f64 = 20.0;

pub struct GeneticAlgorithm {
    pop: Population,
}

impl GeneticAlgorithm {
    pub fn new(initial: Population) -> Self {
        Self { pop: initial }
    }

    fn tournament(&self, rng: &mut ChaCha8Rng) -> usize {
        let n = self.pop.len();
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (fa, fb) = (self.pop.fitness[a], self.pop.fitness[b]);
        if fa < fb || (fa == fb && a <= b) {
            a
        } else {
            b
        }
    }
}

/// Simulated binary crossover of two parents, per variable with probability 1/2.
pub fn sbx(p1: &[f64], p2: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for j in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[j] - p2[j]).abs() <= 1e-14 {
            continue;
        }
        let u: f64 = rng.random();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
        };
        c1[j] = 0.5 * ((1.0 + beta) * p1[j] + (1.0 - beta) * p2[j]);
        c2[j] = 0.5 * ((1.0 - beta) * p1[j] + (1.0 + beta) * p2[j]);
    }
    (c1, c2)
}

/// Bounded polynomial mutation, each variable mutated with probability `prob`.
pub fn polynomial_mutation(x: &mut [f64], domain: &SearchDomain, eta: f64, prob: f64, rng: &mut ChaCha8Rng) {
    for (j, v) in x.iter_mut().enumerate() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let (lo, hi) = (domain.lower[j], domain.upper[j]);
        let span = hi - lo;
        let value = v.clamp(lo, hi);
        let d1 = (value - lo) / span;
        let d2 = (hi - value) / span;
        let u: f64 = rng.random();
        let power = 1.0 / (eta + 1.0);
        let delta = if u < 0.5 {
            let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            val.powf(power) - 1.0
        } else {
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - val.powf(power)
        };
        *v = (value + delta * span).clamp(lo, hi);
    }
}

impl Optimizer for GeneticAlgorithm {
    fn step(&mut self, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) -> Result<Population> {
        let n = self.pop.len();
        let d = self.pop.dimension;
        let domain = eval.domain().clone();
        let mut offspring = Vec::with_capacity(n * d);
        while offspring.len() < n * d {
            let (a, b) = (self.tournament(rng), self.tournament(rng));
            let (mut c1, mut c2) = if rng.random::<f64>() < SBX_PROB {
                sbx(self.pop.row(a), self.pop.row(b), SBX_ETA, rng)
            } else {
                (self.pop.row(a).to_vec(), self.pop.row(b).to_vec())
            };
            for child in [&mut c1, &mut c2] {
                polynomial_mutation(child, &domain, PM_ETA, 1.0 / d as f64, rng);
                if offspring.len() < n * d {
                    offspring.extend_from_slice(child);
                }
            }
        }
        let children = eval.eval_all(d, offspring)?;

        // elite first, then every child except the worst, in generation order
        let elite = self.pop.best_index();
        let worst = *argsort(&children.fitness).last().expect("non-empty offspring");
        let mut points = Vec::with_capacity(n * d);
        let mut fitness = Vec::with_capacity(n);
        points.extend_from_slice(self.pop.row(elite));
        fitness.push(self.pop.fitness[elite]);
        for i in (0..n).filter(|&i| i != worst) {
            points.extend_from_slice(children.row(i));
            fitness.push(children.fitness[i]);
        }
        self.pop = Population {
            dimension: d,
            points,
            fitness,
        };
        Ok(self.pop.clone())
    }
}
