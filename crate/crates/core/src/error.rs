use thiserror::Error;

/// Errors produced by dataset handling, parameter estimation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network profile: {0}")]
    InvalidProfile(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("file {0:?} has zero size")]
    ZeroSizeFile(String),

    #[error("duplicate file id {0:?} in dataset")]
    DuplicateFileId(String),

    #[error("chunk count must be in 1..=4, got {0}")]
    InvalidChunkCount(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse {input:?} as {expected}")]
    UnitParse { input: String, expected: &'static str },

    #[error("infeasible dataset spec: {0}")]
    InfeasibleSpec(String),

    #[error("simulation aborted: {0}")]
    Simulation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
