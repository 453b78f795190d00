//! Problem-class identification from optimizer trajectories.
//!
//! Runs population-based optimizers on the BBOB suite, summarises every
//! logged population by per-column min, max, mean and standard deviation,
//! and trains random forests to recognise the problem class from those
//! summaries. A trajectory-pooled ELA feature set serves as the baseline.
//!
//! ```
//! use dynamorep::bbob::make_instance;
//! use dynamorep::features::trajectory_features;
//! use dynamorep::optimizers::{run, Algorithm, RunSpec};
//!
//! let spec = RunSpec::new(Algorithm::DE, 3, 1, 0, 3);
//! let trajectory = run(&spec, &make_instance(3, 1, 3)?)?;
//! assert_eq!(trajectory_features(&trajectory)?.values.len(), 480);
//! # Ok::<(), dynamorep::Error>(())
//! ```

pub mod bbob;
pub mod config;
pub mod ela;
pub mod error;
pub mod experiments;
pub mod features;
pub mod forest;
pub mod optimizers;
pub mod pipeline;
mod rng;
pub mod store;
pub mod table;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/optimizers.md")]
    mod optimizers {}
    #[doc = include_str!("../../../book/src/dynamorep.md")]
    mod dynamorep {}
    #[doc = include_str!("../../../book/src/ela.md")]
    mod ela {}
    #[doc = include_str!("../../../book/src/forest.md")]
    mod forest {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/results.md")]
    mod results {}
}
