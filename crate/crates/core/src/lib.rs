//! Resource management for vehicular cloudlets: a non-cooperative game that
//! shares a cloudlet's compute and storage among co-located VMs, and a
//! reservation scheme that keeps part of the resources for VMs migrating in
//! from neighbouring cloudlets.

// Validation uses `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod game;
pub mod model;
pub mod output;
pub mod reservation;
pub mod sim;

pub use error::{ConfigError, GameError, ReservationError, SimError};
pub use model::{
    AllocationProfile, Capacity, ConfigDocument, Estimate, GameConfig, LossMetrics, OccupancyState, ScenarioCounts,
    SimReport, SteadyStateSolution, UpdateOrder, ValidatedConfig, VmClassSpec, VmGameParams, VrcState,
};
pub use reservation::RateModel;
pub use sim::{CorridorConfig, LossSimParams};
