//! Discrete-event simulation of the reservation scheme.
//!
//! Two modes share the admission rules of [`crate::reservation`]:
//! the loss mode replays the Markov model's assumptions (Poisson arrivals,
//! exponential lifetimes) to validate it, and the corridor mode derives
//! migrated traffic from vehicles driving past roadside units.

mod compare;
mod corridor;
mod loss;
mod queue;
mod stats;

pub use compare::{compare_analytic_vs_sim, ComparisonRow};
pub use corridor::{
    classify_migration, run_corridor_sim, Admission, CorridorConfig, CorridorRun, MigrationScenario, Rsu,
    VehicleTrace,
};
pub use loss::{loss_event_log, run_loss_sim, simulate_replication, ReplicationResult};
pub use queue::EventQueue;
pub use stats::{estimate, t_quantile_975};

use serde::Serialize;

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LocalArrival,
    LocalDeparture,
    MigratedArrival,
    MigratedDeparture,
    HandoffNoMigration,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LocalArrival => "local_arrival",
            Self::LocalDeparture => "local_departure",
            Self::MigratedArrival => "migrated_arrival",
            Self::MigratedDeparture => "migrated_departure",
            Self::HandoffNoMigration => "handoff_no_migration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Admitted,
    Blocked,
    Dropped,
    Completed,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Admitted => "admitted",
            Self::Blocked => "blocked",
            Self::Dropped => "dropped",
            Self::Completed => "completed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub class_index: usize,
    pub outcome: Outcome,
    pub cloudlet: usize,
    pub vehicle_id: Option<u64>,
}

/// Run length, warm-up and replication settings of the loss simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSimParams {
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
}

impl LossSimParams {
    pub fn new(horizon: f64, warmup: f64, replications: usize, seed: u64) -> Result<Self, ConfigError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ConfigError::new("simulation.horizon", "must be > 0"));
        }
        if !(warmup >= 0.0 && warmup < horizon) {
            return Err(ConfigError::new("simulation.warmup", "must be in [0, horizon)"));
        }
        if replications == 0 {
            return Err(ConfigError::new("simulation.replications", "must be >= 1"));
        }
        Ok(Self {
            horizon,
            warmup,
            replications,
            seed,
        })
    }

    /// Warm-up defaults to a tenth of the horizon.
    pub fn with_default_warmup(horizon: f64, replications: usize, seed: u64) -> Result<Self, ConfigError> {
        Self::new(horizon, 0.1 * horizon, replications, seed)
    }
}

/// Independent random stream for `(replication, event type)`.
pub(crate) fn stream_rng(seed: u64, replication: usize, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replication as u64) << 32) | stream);
    rng
}
