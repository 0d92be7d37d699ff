use thiserror::Error;

/// Errors produced by the coding, decoding, analytics and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient rank: have {rank}, need {needed}")]
    InsufficientRank { rank: usize, needed: usize },

    #[error("malformed packet: {0}")]
    Format(String),

    #[error("not a source packet: header block {block} has {ones} set bits")]
    NotSourcePacket { block: usize, ones: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("no closed-form distribution for n_v = {0}; use an empirical rank profile")]
    AnalyticUnavailable(usize),

    #[error("topology generation failed after {attempts} placements")]
    TopologyGeneration { attempts: usize },

    #[error("simulation did not terminate: {0}")]
    NonTermination(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
