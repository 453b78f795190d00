//! (μ+λ) evolution strategy with log-normal self-adaptation of one step size
//! per coordinate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{argsort, Evaluator, Optimizer, Population};
use crate::error::Result;

pub const SIGMA_MIN: f64 = 1e-10;
pub const SIGMA_MAX: f64 = 5.0;

#[derive(Debug, Clone)]
struct Parent {
    x: Vec<f64>,
    sigma: Vec<f64>,
    y: f64,
}

pub struct EvolutionStrategy {
    parents: Vec<Parent>,
    offspring: usize,
    global_rate: f64,
    local_rate: f64,
}

impl EvolutionStrategy {
    /// Parents are the best `λ/2` members of the initial population, each
    /// starting from step size `(upper - lower) / 4` on every coordinate.
    pub fn new(initial: Population, offspring: usize) -> Self {
        let d = initial.dimension;
        let mu = (offspring / 2).max(1);
        let sigma0 = 0.5 * (crate::bbob::UPPER - crate::bbob::LOWER) / 2.0;
        let parents = argsort(&initial.fitness)
            .into_iter()
            .take(mu)
            .map(|i| Parent {
                x: initial.row(i).to_vec(),
                sigma: vec![sigma0; d],
                y: initial.fitness[i],
            })
            .collect();
        let df = d as f64;
        Self {
            parents,
            offspring,
            global_rate: 1.0 / (2.0 * df).sqrt(),
            local_rate: 1.0 / (2.0 * df.sqrt()).sqrt(),
        }
    }

    pub fn parent_count(&self) -> usize {
        self.parents.len()
    }

    pub fn best_fitness(&self) -> f64 {
        self.parents.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }
}

impl Optimizer for EvolutionStrategy {
    fn step(&mut self, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) -> Result<Population> {
        let d = self.parents[0].x.len();
        let mut children = Vec::with_capacity(self.offspring);
        for _ in 0..self.offspring {
            let parent = &self.parents[rng.random_range(0..self.parents.len())];
            let shared: f64 = rng.sample(StandardNormal);
            let mut sigma = parent.sigma.clone();
            let mut x = parent.x.clone();
            for j in 0..d {
                let own: f64 = rng.sample(StandardNormal);
                sigma[j] = (sigma[j] * (self.global_rate * shared + self.local_rate * own).exp())
                    .clamp(SIGMA_MIN, SIGMA_MAX);
                let step: f64 = rng.sample(StandardNormal);
                x[j] += sigma[j] * step;
            }
            let y = eval.eval(&mut x)?;
            children.push(Parent { x, sigma, y });
        }

        let logged = Population {
            dimension: d,
            points: children.iter().flat_map(|c| c.x.iter().copied()).collect(),
            fitness: children.iter().map(|c| c.y).collect(),
        };

        let mu = self.parents.len();
        let mut pool = std::mem::take(&mut self.parents);
        pool.extend(children);
        let fitness: Vec<f64> = pool.iter().map(|p| p.y).collect();
        let order = argsort(&fitness);
        self.parents = order.into_iter().take(mu).map(|i| pool[i].clone()).collect();
        Ok(logged)
    }
}
