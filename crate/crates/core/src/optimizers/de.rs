//! DE/rand/1/bin with one-to-one elitist survivor selection.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Evaluator, Optimizer, Population};
use crate::error::Result;

pub const SCALE_FACTOR: f64 = 0.5;
pub const CROSSOVER_RATE: f64 = 0.3;

pub struct DifferentialEvolution {
    pop: Population,
    pub scale_factor: f64,
    pub crossover_rate: f64,
}

impl DifferentialEvolution {
    pub fn new(initial: Population) -> Self {
        Self {
            pop: initial,
            scale_factor: SCALE_FACTOR,
            crossover_rate: CROSSOVER_RATE,
        }
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    /// Trial vector for target `i`: mutant from three distinct random donors
    /// (all different from `i`), then binomial crossover.
    fn trial(&self, i: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.pop.len();
        let d = self.pop.dimension;
        let mut donors = [i; 3];
        for k in 0..3 {
            loop {
                let c = rng.random_range(0..n);
                if c != i && !donors[..k].contains(&c) {
                    donors[k] = c;
                    break;
                }
            }
        }
        let (a, b, c) = (self.pop.row(donors[0]), self.pop.row(donors[1]), self.pop.row(donors[2]));
        let target = self.pop.row(i);
        let forced = rng.random_range(0..d);
        (0..d)
            .map(|j| {
                if j == forced || rng.random::<f64>() < self.crossover_rate {
                    a[j] + self.scale_factor * (b[j] - c[j])
                } else {
                    target[j]
                }
            })
            .collect()
    }
}

impl Optimizer for DifferentialEvolution {
    fn step(&mut self, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) -> Result<Population> {
        let n = self.pop.len();
        let d = self.pop.dimension;
        let trials: Vec<Vec<f64>> = (0..n).map(|i| self.trial(i, rng)).collect();
        for (i, mut trial) in trials.into_iter().enumerate() {
            let y = eval.eval(&mut trial)?;
            if y <= self.pop.fitness[i] {
                self.pop.points[i * d..(i + 1) * d].copy_from_slice(&trial);
                self.pop.fitness[i] = y;
            }
        }
        Ok(self.pop.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::make_instance;
    use rand::SeedableRng;

    #[test]
    fn worse_trial_keeps_target() {
        // target 0 sits at the optimum; every trial is at least as bad, so it
        // must survive unchanged (ties replace, but a tie here means identical)
        let inst = make_instance(1, 1, 2).unwrap();
        let mut points = inst.x_opt.clone();
        for k in 1..6 {
            points.extend([k as f64 * 0.7 - 2.0, 1.5 - k as f64 * 0.4]);
        }
        let mut eval = Evaluator::new(&inst, "t".into());
        let pop = eval.eval_all(2, points).unwrap();
        let before = pop.row(0).to_vec();
        let mut de = DifferentialEvolution::new(pop);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let next = de.step(&mut rng, &mut eval).unwrap();
            assert_eq!(next.row(0), &before[..]);
            assert_eq!(next.fitness[0], inst.f_opt);
        }
    }
}
