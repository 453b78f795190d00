//! Population-based optimizers that log every evaluated population.
//!
//! All four algorithms share the same skeleton: iteration 0 is a Latin
//! hypercube sample of `population_size` points drawn from a stream keyed by
//! the run seed alone (so every problem sees the same initial design for a
//! given seed), and each later iteration evaluates exactly `population_size`
//! new points drawn from a stream keyed by
//! `(algorithm, problem_id, instance_id, seed)`. Candidates are clipped into
//! `[-5, 5]^d` before evaluation.
//!
//! What gets logged per iteration:
//!
//! | algorithm | snapshot after iteration `t >= 1` |
//! |-----------|-----------------------------------|
//! | DE        | population after one-to-one selection |
//! | GA        | next generation (elite + best `λ-1` offspring) |
//! | ES        | the `λ` evaluated offspring |
//! | CMA-ES    | the `λ` evaluated offspring |

pub mod cmaes;
pub mod de;
pub mod es;
pub mod ga;
mod lhs;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bbob::{ProblemInstance, SearchDomain};
use crate::error::{invalid, Error, Result};
use crate::rng;

pub use lhs::lhs_init;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    DE,
    GA,
    ES,
    CMAES,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::DE, Algorithm::GA, Algorithm::ES, Algorithm::CMAES];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::DE => "DE",
            Algorithm::GA => "GA",
            Algorithm::ES => "ES",
            Algorithm::CMAES => "CMAES",
        }
    }

    fn code(self) -> u64 {
        match self {
            Algorithm::DE => 1,
            Algorithm::GA => 2,
            Algorithm::ES => 3,
            Algorithm::CMAES => 4,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "DE" => Ok(Algorithm::DE),
            "GA" => Ok(Algorithm::GA),
            "ES" => Ok(Algorithm::ES),
            "CMAES" => Ok(Algorithm::CMAES),
            _ => Err(invalid(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Everything that determines one optimizer run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub problem_id: u8,
    pub instance_id: u32,
    pub seed: u64,
    pub population_size: usize,
    pub iterations: usize,
    pub dimension: usize,
}

impl RunSpec {
    /// Run with the default budget: population `10d`, 30 iterations.
    pub fn new(algorithm: Algorithm, problem_id: u8, instance_id: u32, seed: u64, dimension: usize) -> Self {
        Self {
            algorithm,
            problem_id,
            instance_id,
            seed,
            population_size: 10 * dimension,
            iterations: 30,
            dimension,
        }
    }

    pub fn total_evaluations(&self) -> usize {
        self.population_size * self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(invalid("population size must be at least 2"));
        }
        if self.algorithm == Algorithm::DE && self.population_size < 4 {
            return Err(invalid("DE/rand/1 needs a population of at least 4"));
        }
        if self.iterations == 0 {
            return Err(invalid("at least one iteration is required"));
        }
        if self.dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "{} f{} i{} seed {}",
            self.algorithm, self.problem_id, self.instance_id, self.seed
        )
    }
}

/// One evaluated population, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSnapshot {
    pub iteration: usize,
    pub dimension: usize,
    /// `len() * dimension` coordinates, one candidate per row.
    pub points: Vec<f64>,
    pub fitness: Vec<f64>,
}

impl PopulationSnapshot {
    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dimension.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: RunSpec,
    pub snapshots: Vec<PopulationSnapshot>,
}

/// Working population passed between generations.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub dimension: usize,
    pub points: Vec<f64>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn best_index(&self) -> usize {
        argsort(&self.fitness)[0]
    }

    fn snapshot(&self, iteration: usize) -> PopulationSnapshot {
        PopulationSnapshot {
            iteration,
            dimension: self.dimension,
            points: self.points.clone(),
            fitness: self.fitness.clone(),
        }
    }
}

/// Indices sorted by ascending value; ties keep index order.
pub(crate) fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Counts evaluations and rejects non-finite objective values.
pub struct Evaluator<'a> {
    instance: &'a ProblemInstance,
    domain: SearchDomain,
    label: String,
    iteration: usize,
    count: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a ProblemInstance, label: String) -> Self {
        Self {
            instance,
            domain: instance.domain(),
            label,
            iteration: 0,
            count: 0,
        }
    }

    pub fn domain(&self) -> &SearchDomain {
        &self.domain
    }

    pub fn evaluations(&self) -> usize {
        self.count
    }

    /// Clip `x` into the domain in place and evaluate it.
    pub fn eval(&mut self, x: &mut [f64]) -> Result<f64> {
        self.domain.clip(x);
        self.count += 1;
        let y = self.instance.eval_unchecked(x);
        if !y.is_finite() {
            return Err(Error::NonFiniteFitness {
                run: self.label.clone(),
                iteration: self.iteration,
            });
        }
        Ok(y)
    }

    pub fn eval_all(&mut self, dimension: usize, mut points: Vec<f64>) -> Result<Population> {
        let mut fitness = Vec::with_capacity(points.len() / dimension);
        for row in points.chunks_exact_mut(dimension) {
            fitness.push(self.eval(row)?);
        }
        Ok(Population {
            dimension,
            points,
            fitness,
        })
    }
}

/// Stream used for the initial design; depends on the run seed only.
pub fn lhs_rng(seed: u64) -> ChaCha8Rng {
    rng::stream(&[0x004C_4853, seed])
}

/// Stream used by the generation steps of one run.
pub fn run_rng(spec: &RunSpec) -> ChaCha8Rng {
    rng::stream(&[
        spec.algorithm.code(),
        spec.problem_id as u64,
        spec.instance_id as u64,
        spec.seed,
    ])
}

/// Algorithm state advanced one generation at a time.
pub trait Optimizer {
    /// Produce the next logged population, evaluating exactly `λ` points.
    fn step(&mut self, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) -> Result<Population>;
}

/// Execute one fixed-budget run and record its trajectory.
pub fn run(spec: &RunSpec, instance: &ProblemInstance) -> Result<Trajectory> {
    spec.validate()?;
    if spec.dimension != instance.dimension {
        return Err(invalid(format!(
            "run dimension {} does not match instance dimension {}",
            spec.dimension, instance.dimension
        )));
    }
    let d = spec.dimension;
    let lambda = spec.population_size;
    let mut eval = Evaluator::new(instance, spec.label());

    let init_points = lhs_init(eval.domain(), lambda, &mut lhs_rng(spec.seed));
    let initial = eval.eval_all(d, init_points)?;
    let mut snapshots = Vec::with_capacity(spec.iterations);
    snapshots.push(initial.snapshot(0));

    let mut optimizer: Box<dyn Optimizer> = match spec.algorithm {
        Algorithm::DE => Box::new(de::DifferentialEvolution::new(initial)),
        Algorithm::GA => Box::new(ga::GeneticAlgorithm::new(initial)),
        Algorithm::ES => Box::new(es::EvolutionStrategy::new(initial, lambda)),
        Algorithm::CMAES => Box::new(cmaes::Cmaes::new(&initial, lambda)),
    };
    let mut rng = run_rng(spec);
    for t in 1..spec.iterations {
        eval.iteration = t;
        let pop = optimizer.step(&mut rng, &mut eval)?;
        debug_assert_eq!(pop.len(), lambda);
        snapshots.push(pop.snapshot(t));
    }
    debug_assert_eq!(eval.evaluations(), spec.total_evaluations());
    Ok(Trajectory {
        spec: spec.clone(),
        snapshots,
    })
}
