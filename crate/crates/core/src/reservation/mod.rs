//! Occupancy Markov chain of a cloud site that reserves part of its
//! resources for migrated VMs.
//!
//! The state is the number of local and migrated VMs of every class. Local
//! VMs are confined to the common resources; migrated VMs may use all of
//! them. Arrivals are Poisson and every resident VM departs after an
//! exponential lifetime, so class `k` leaves at rate `n_k * mu_k`.

mod generator;
mod metrics;
mod optimize;
mod solver;
mod states;

pub use generator::{build_generator, Generator};
pub use metrics::{
    blocking_rate, dropping_rate, in_blocking_set, in_dropping_set, loss_metrics, mean_occupancy,
    utilization,
};
pub use optimize::{optimize_reservation, GridRow, OptimizationOutcome};
pub use solver::{solve_steady_state, solve_steady_state_with, SolverOptions};
pub use states::{enumerate_states, StateIndex};

use crate::error::{ConfigError, ReservationError};
use crate::model::{fits, Capacity, OccupancyState, SteadyStateSolution, VmClassSpec};

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepartureSemantics {
    /// Each resident VM departs independently: class rate `n * mu`.
    #[default]
    PerVm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    classes: Vec<VmClassSpec>,
    capacity: Capacity,
    departure_semantics: DepartureSemantics,
    state_cap: usize,
}

impl RateModel {
    pub fn new(classes: Vec<VmClassSpec>, capacity: Capacity) -> Result<Self, ConfigError> {
        if classes.is_empty() {
            return Err(ConfigError::new("classes", "must contain at least one class"));
        }
        for (k, c) in classes.iter().enumerate() {
            c.validate_at(&format!("classes[{k}]"))?;
        }
        Ok(Self {
            classes,
            capacity,
            departure_semantics: DepartureSemantics::PerVm,
            state_cap: DEFAULT_STATE_CAP,
        })
    }

    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn with_capacity(&self, capacity: Capacity) -> Self {
        Self {
            capacity,
            ..self.clone()
        }
    }

    /// Same model with every class's local arrival rate replaced.
    pub fn with_local_arrival_rate(&self, rate: f64) -> Result<Self, ConfigError> {
        let classes = self
            .classes
            .iter()
            .map(|c| VmClassSpec {
                local_arrival_rate: rate,
                ..*c
            })
            .collect();
        Ok(Self::new(classes, self.capacity)?.with_state_cap(self.state_cap))
    }

    pub fn classes(&self) -> &[VmClassSpec] {
        &self.classes
    }
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
    pub fn capacity(&self) -> &Capacity {
        &self.capacity
    }
    pub fn departure_semantics(&self) -> DepartureSemantics {
        self.departure_semantics
    }
    pub fn state_cap(&self) -> usize {
        self.state_cap
    }
    pub fn total_local_arrival_rate(&self) -> f64 {
        self.classes.iter().map(|c| c.local_arrival_rate).sum()
    }
    pub fn total_migrated_arrival_rate(&self) -> f64 {
        self.classes.iter().map(|c| c.migrated_arrival_rate).sum()
    }
}

/// Whether a new local VM of class `k` can be admitted in `state`.
///
/// It must fit within the common resources together with the other local
/// VMs, and within the site totals together with every resident VM.
pub fn local_admissible(state: &OccupancyState, k: usize, classes: &[VmClassSpec], capacity: &Capacity) -> bool {
    let spec = &classes[k];
    let (lc, lm) = state.local_usage(classes);
    let (tc, tm) = state.total_usage(classes);
    fits(lc + spec.compute_req, capacity.compute_common())
        && fits(lm + spec.storage_req, capacity.storage_common())
        && fits(tc + spec.compute_req, capacity.compute_total())
        && fits(tm + spec.storage_req, capacity.storage_total())
}

/// Whether a migrated VM of class `k` can be admitted in `state`: all
/// resident VMs plus the newcomer must fit within the site totals.
pub fn migrated_admissible(state: &OccupancyState, k: usize, classes: &[VmClassSpec], capacity: &Capacity) -> bool {
    let spec = &classes[k];
    let (tc, tm) = state.total_usage(classes);
    fits(tc + spec.compute_req, capacity.compute_total()) && fits(tm + spec.storage_req, capacity.storage_total())
}

/// Enumerate, build, solve and attach blocking/dropping metrics.
pub fn analyze(model: &RateModel) -> Result<SteadyStateSolution, ReservationError> {
    analyze_with(model, &SolverOptions::default())
}

pub fn analyze_with(model: &RateModel, options: &SolverOptions) -> Result<SteadyStateSolution, ReservationError> {
    let states = enumerate_states(model)?;
    let q = build_generator(model, &states);
    let mut solution = solve_steady_state_with(&q, states.into_states(), options)?;
    solution.metrics = Some(loss_metrics(&solution, model));
    Ok(solution)
}
