use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("user placement impossible: min_dist {min_dist} m >= hexagon inradius {inradius} m")]
    PlacementImpossible { min_dist: f64, inradius: f64 },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("index out of range: {what} {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("row {row} is not a permutation of 0..{pilots}")]
    NotAPermutation { row: usize, pilots: usize },

    #[error("fitness value {0} is not finite")]
    NonFiniteFitness(f64),

    #[error("empty population")]
    EmptyPopulation,

    #[error("need at least {clusters} points, got {points}")]
    TooFewPoints { points: usize, clusters: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("cluster {0} has zero own-signal average")]
    ZeroOwnSignal(usize),

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("search space of {space} assignments exceeds enumeration limit {limit}")]
    Infeasible { space: String, limit: u64 },

    #[error("solver {solver} has {samples} samples, need at least 2")]
    InsufficientSamples { solver: String, samples: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
