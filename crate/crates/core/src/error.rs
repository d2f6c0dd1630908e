use thiserror::Error;

/// A violated configuration invariant, located by its field path
/// (e.g. `game.players[2].alpha`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path} {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("player index {index} out of range for {players} players")]
    PlayerOutOfRange { index: usize, players: usize },
    #[error("request {field}[{index}] = {value} outside (0, {limit}]")]
    RequestOutOfRange {
        field: &'static str,
        index: usize,
        value: f64,
        limit: f64,
    },
    #[error("expected {expected} entries in {field}, got {actual}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("empty request vector")]
    EmptyRequests,
    #[error("negative grant {0}")]
    NegativeGrant(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReservationError {
    #[error("state space exceeds cap of {cap} states (enumerated {partial} before stopping)")]
    StateSpaceOverflow { cap: usize, partial: usize },
    #[error("steady-state system is singular or unsolved (residual {residual:e})")]
    Singular { residual: f64 },
    #[error("reservation candidate (C_r={compute_reserved}, M_r={storage_reserved}) is invalid: {source}")]
    InvalidCandidate {
        compute_reserved: f64,
        storage_reserved: f64,
        #[source]
        source: ConfigError,
    },
    #[error("empty reservation grid")]
    EmptyGrid,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown RSU index {index} (corridor has {count})")]
    UnknownRsu { index: usize, count: usize },
    #[error("unknown VM class index {index} ({count} classes)")]
    UnknownClass { index: usize, count: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}
