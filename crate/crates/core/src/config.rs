//! Experiment configuration and its content hash.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::experiments::FeatureKind;
use crate::forest::ForestConfig;
use crate::optimizers::{Algorithm, RunSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// Instances per problem class, ids `1..=instances`.
    pub instances: u32,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub iterations: usize,
    pub population: usize,
    pub feature_kind: FeatureKind,
    pub folds: usize,
    pub forest_seed: u64,
    pub trees: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 3,
            instances: 100,
            seeds: (0..5).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            iterations: 30,
            population: 30,
            feature_kind: FeatureKind::DynamoRep,
            folds: 10,
            forest_seed: 0,
            trees: 100,
            output_dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

/// The fields that change results. Output location, thread count and the
/// feature kind (which only selects output files) are left out.
#[derive(Serialize)]
struct HashedFields<'a> {
    dimension: usize,
    instances: u32,
    seeds: &'a [u64],
    algorithms: &'a [Algorithm],
    iterations: usize,
    population: usize,
    folds: usize,
    forest_seed: u64,
    trees: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        if self.instances == 0 || self.iterations == 0 || self.population == 0 || self.trees == 0 {
            return Err(invalid("instances, iterations, population and trees must be positive"));
        }
        if self.seeds.is_empty() || self.algorithms.is_empty() {
            return Err(invalid("at least one seed and one algorithm are required"));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(invalid("seeds must be distinct"));
        }
        if self.algorithms.iter().collect::<HashSet<_>>().len() != self.algorithms.len() {
            return Err(invalid("algorithms must be distinct"));
        }
        if self.folds < 2 || (self.instances as usize) < self.folds {
            return Err(invalid(format!(
                "{} instances cannot fill {} folds",
                self.instances, self.folds
            )));
        }
        for &algorithm in &self.algorithms {
            self.run_spec(algorithm, 1, 1, self.seeds[0]).validate()?;
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the result-affecting fields.
    pub fn hash(&self) -> String {
        let fields = HashedFields {
            dimension: self.dimension,
            instances: self.instances,
            seeds: &self.seeds,
            algorithms: &self.algorithms,
            iterations: self.iterations,
            population: self.population,
            folds: self.folds,
            forest_seed: self.forest_seed,
            trees: self.trees,
        };
        let json = serde_json::to_vec(&fields).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Comment line written at the top of every CSV output.
    pub fn header_line(&self) -> String {
        format!("# dynamorep {VERSION} config={}", self.hash())
    }

    pub fn run_spec(&self, algorithm: Algorithm, problem_id: u8, instance_id: u32, seed: u64) -> RunSpec {
        RunSpec {
            algorithm,
            problem_id,
            instance_id,
            seed,
            population_size: self.population,
            iterations: self.iterations,
            dimension: self.dimension,
        }
    }

    /// Every run for one algorithm, in key order.
    pub fn runs(&self, algorithm: Algorithm) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for pid in 1..=crate::bbob::NUM_CLASSES {
            for iid in 1..=self.instances {
                for &seed in &self.seeds {
                    out.push(self.run_spec(algorithm, pid, iid, seed));
                }
            }
        }
        out
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            seed: self.forest_seed,
            ..ForestConfig::default()
        }
    }

    /// Run `f` on a thread pool sized by `workers`.
    pub fn with_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}
