use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContestError {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("dimension mismatch: expected length {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("singular linear system ({0})")]
    Singular(String),

    #[error("battlefield {battlefield} has zero effective effort from both players")]
    ZeroEffectiveEffort { battlefield: usize },

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("non-finite gradient for player {player} at battlefield {battlefield}")]
    NonFiniteGradient { player: usize, battlefield: usize },

    #[error("no certified equilibrium found: {0}")]
    NoCertifiedEquilibrium(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ContestError>;
