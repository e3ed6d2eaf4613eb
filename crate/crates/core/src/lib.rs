//! Pilot assignment for multi-cell massive MIMO.
//!
//! The crate generates hexagonal multi-cell scenarios with path loss and
//! log-normal shadowing, scores pilot assignments by their large-antenna
//! uplink spectral efficiency, and searches for good assignments with random,
//! exhaustive, genetic, and k-means island genetic solvers.
//!
//! ```
//! use pilot_core::{solvers, topology::Scenario, encoding::GaConfig};
//!
//! let beta = Scenario::new(4, 6, 64, 7).realize().unwrap().beta;
//! let config = GaConfig { population_size: 40, generations: 10, seed: 7, ..GaConfig::default() };
//! let result = solvers::solve_sk_ga(&beta, &config).unwrap();
//! assert!(result.best.is_canonical());
//! ```

pub mod encoding;
pub mod error;
pub mod harness;
pub mod kmeans;
pub mod metrics;
pub mod rng;
pub mod solvers;
pub mod topology;

pub use encoding::{FitnessMode, GaConfig, PilotAssignment};
pub use error::{Error, Result};
pub use metrics::{SeModel, SeReport};
pub use solvers::{SolveResult, SolverKind, SolverSpec};
pub use topology::{FadingTensor, Scenario};
