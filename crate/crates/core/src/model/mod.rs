//! Domain types shared by the allocation game, the reservation model and the
//! simulators. Constructors validate; fields are read-only afterwards.

mod config;

pub use config::{
    validate_config, CapacityDoc, ClassDoc, ConfigDocument, CorridorDoc, GameDoc, PlayerDoc,
    GameSetup, RsuDoc, SimulationDoc, ValidatedConfig, VrcDoc,
};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Relative slack used when comparing resource sums against a capacity.
pub(crate) const FEASIBILITY_EPS: f64 = 1e-9;

#[inline]
pub(crate) fn fits(used: f64, capacity: f64) -> bool {
    used <= capacity + FEASIBILITY_EPS * capacity.abs().max(1.0)
}

fn positive(path: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, "must be > 0"))
    }
}

fn non_negative(path: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, "must be >= 0"))
    }
}

/// Total and reserved resources of one cloud site.
///
/// Local VMs may only use the common part (`total - reserved`); migrated VMs
/// may use everything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    compute_total: f64,
    storage_total: f64,
    compute_reserved: f64,
    storage_reserved: f64,
}

impl Capacity {
    pub fn new(
        compute_total: f64,
        storage_total: f64,
        compute_reserved: f64,
        storage_reserved: f64,
    ) -> Result<Self, ConfigError> {
        Self::validate_at("capacity", compute_total, storage_total, compute_reserved, storage_reserved)
    }

    pub fn unreserved(compute_total: f64, storage_total: f64) -> Result<Self, ConfigError> {
        Self::new(compute_total, storage_total, 0.0, 0.0)
    }

    pub(crate) fn validate_at(
        prefix: &str,
        compute_total: f64,
        storage_total: f64,
        compute_reserved: f64,
        storage_reserved: f64,
    ) -> Result<Self, ConfigError> {
        positive(&format!("{prefix}.compute_total"), compute_total)?;
        positive(&format!("{prefix}.storage_total"), storage_total)?;
        non_negative(&format!("{prefix}.compute_reserved"), compute_reserved)?;
        non_negative(&format!("{prefix}.storage_reserved"), storage_reserved)?;
        if compute_reserved >= compute_total {
            return Err(ConfigError::new(
                format!("{prefix}.compute_reserved"),
                "must be < compute_total (common compute resources empty)",
            ));
        }
        if storage_reserved >= storage_total {
            return Err(ConfigError::new(
                format!("{prefix}.storage_reserved"),
                "must be < storage_total (common storage resources empty)",
            ));
        }
        Ok(Self {
            compute_total,
            storage_total,
            compute_reserved,
            storage_reserved,
        })
    }

    /// Same totals, different reservation.
    pub fn with_reservation(
        &self,
        compute_reserved: f64,
        storage_reserved: f64,
    ) -> Result<Self, ConfigError> {
        Self::new(
            self.compute_total,
            self.storage_total,
            compute_reserved,
            storage_reserved,
        )
    }

    pub fn compute_total(&self) -> f64 {
        self.compute_total
    }
    pub fn storage_total(&self) -> f64 {
        self.storage_total
    }
    pub fn compute_reserved(&self) -> f64 {
        self.compute_reserved
    }
    pub fn storage_reserved(&self) -> f64 {
        self.storage_reserved
    }
    pub fn compute_common(&self) -> f64 {
        self.compute_total - self.compute_reserved
    }
    pub fn storage_common(&self) -> f64 {
        self.storage_total - self.storage_reserved
    }
}

/// Per-VM weights and prices of the allocation game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmGameParams {
    pub alpha: f64,
    pub beta: f64,
    pub price_compute: f64,
    pub price_storage: f64,
}

impl VmGameParams {
    pub fn new(alpha: f64, beta: f64, price_compute: f64, price_storage: f64) -> Result<Self, ConfigError> {
        let p = Self {
            alpha,
            beta,
            price_compute,
            price_storage,
        };
        p.validate_at("player")?;
        Ok(p)
    }

    pub(crate) fn validate_at(&self, prefix: &str) -> Result<(), ConfigError> {
        positive(&format!("{prefix}.alpha"), self.alpha)?;
        positive(&format!("{prefix}.beta"), self.beta)?;
        positive(&format!("{prefix}.price_compute"), self.price_compute)?;
        positive(&format!("{prefix}.price_storage"), self.price_storage)
    }
}

/// How a best-response round updates the players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    /// Player 1..N in turn, each seeing the latest requests of the others.
    #[default]
    Sequential,
    /// Every player responds to the previous round's profile.
    Simultaneous,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    capacity: Capacity,
    players: Vec<VmGameParams>,
    request_floor: f64,
    tolerance: f64,
    max_iterations: usize,
    update_order: UpdateOrder,
}

impl GameConfig {
    /// Config with the default floor, tolerance and iteration limit.
    pub fn new(capacity: Capacity, players: Vec<VmGameParams>) -> Result<Self, ConfigError> {
        let floor = capacity.compute_total().min(capacity.storage_total()) * DEFAULT_FLOOR_FRACTION;
        Self::with_options(
            capacity,
            players,
            floor,
            DEFAULT_TOLERANCE,
            DEFAULT_MAX_ITERATIONS,
            UpdateOrder::Sequential,
        )
    }

    pub fn with_options(
        capacity: Capacity,
        players: Vec<VmGameParams>,
        request_floor: f64,
        tolerance: f64,
        max_iterations: usize,
        update_order: UpdateOrder,
    ) -> Result<Self, ConfigError> {
        if players.is_empty() {
            return Err(ConfigError::new("game.players", "must contain at least one player"));
        }
        for (i, p) in players.iter().enumerate() {
            p.validate_at(&format!("game.players[{i}]"))?;
        }
        positive("game.request_floor", request_floor)?;
        if request_floor > capacity.compute_total() / 1000.0
            || request_floor > capacity.storage_total() / 1000.0
        {
            return Err(ConfigError::new(
                "game.request_floor",
                "must be <= compute_total/1000 and <= storage_total/1000",
            ));
        }
        positive("game.tolerance", tolerance)?;
        if max_iterations == 0 {
            return Err(ConfigError::new("game.max_iterations", "must be >= 1"));
        }
        Ok(Self {
            capacity,
            players,
            request_floor,
            tolerance,
            max_iterations,
            update_order,
        })
    }

    pub fn capacity(&self) -> &Capacity {
        &self.capacity
    }
    pub fn players(&self) -> &[VmGameParams] {
        &self.players
    }
    pub fn num_players(&self) -> usize {
        self.players.len()
    }
    pub fn request_floor(&self) -> f64 {
        self.request_floor
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
    pub fn update_order(&self) -> UpdateOrder {
        self.update_order
    }

    pub fn with_update_order(mut self, order: UpdateOrder) -> Self {
        self.update_order = order;
        self
    }

    /// The same game restricted to a subset of the players, in the given order.
    pub fn subgame(&self, indices: &[usize]) -> Result<Self, ConfigError> {
        let players = indices.iter().map(|&i| self.players[i]).collect();
        Self::with_options(
            self.capacity,
            players,
            self.request_floor,
            self.tolerance,
            self.max_iterations,
            self.update_order,
        )
    }
}

/// Requests and proportional shares of every player at some iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationProfile {
    pub requests_compute: Vec<f64>,
    pub requests_storage: Vec<f64>,
    pub shares_compute: Vec<f64>,
    pub shares_storage: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Virtual resource counters: cumulative granted compute and storage per VM.
#[derive(Debug, Clone, PartialEq)]
pub struct VrcState {
    pub(crate) applied_compute: Vec<f64>,
    pub(crate) applied_storage: Vec<f64>,
    pub(crate) cap_compute: f64,
    pub(crate) cap_storage: f64,
}

impl VrcState {
    pub fn new(players: usize, cap_compute: f64, cap_storage: f64) -> Result<Self, ConfigError> {
        if players == 0 {
            return Err(ConfigError::new("vrc.players", "must be >= 1"));
        }
        positive("vrc.cap_compute", cap_compute)?;
        positive("vrc.cap_storage", cap_storage)?;
        Ok(Self {
            applied_compute: vec![0.0; players],
            applied_storage: vec![0.0; players],
            cap_compute,
            cap_storage,
        })
    }

    /// Default caps: 100 times the site capacity of each resource.
    pub fn with_default_caps(players: usize, capacity: &Capacity) -> Self {
        Self::new(
            players,
            100.0 * capacity.compute_total(),
            100.0 * capacity.storage_total(),
        )
        .expect("capacity totals are positive")
    }

    pub fn applied_compute(&self) -> &[f64] {
        &self.applied_compute
    }
    pub fn applied_storage(&self) -> &[f64] {
        &self.applied_storage
    }
    pub fn cap_compute(&self) -> f64 {
        self.cap_compute
    }
    pub fn cap_storage(&self) -> f64 {
        self.cap_storage
    }
    pub fn num_players(&self) -> usize {
        self.applied_compute.len()
    }
    pub fn compute_eligible(&self, player: usize) -> bool {
        self.applied_compute[player] < self.cap_compute
    }
    pub fn storage_eligible(&self, player: usize) -> bool {
        self.applied_storage[player] < self.cap_storage
    }
}

/// Footprint and traffic of one VM class in the reservation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmClassSpec {
    pub compute_req: f64,
    pub storage_req: f64,
    pub local_arrival_rate: f64,
    pub local_departure_rate: f64,
    pub migrated_arrival_rate: f64,
    pub migrated_departure_rate: f64,
}

impl VmClassSpec {
    pub fn new(
        compute_req: f64,
        storage_req: f64,
        local_arrival_rate: f64,
        local_departure_rate: f64,
        migrated_arrival_rate: f64,
        migrated_departure_rate: f64,
    ) -> Result<Self, ConfigError> {
        let spec = Self {
            compute_req,
            storage_req,
            local_arrival_rate,
            local_departure_rate,
            migrated_arrival_rate,
            migrated_departure_rate,
        };
        spec.validate_at("class")?;
        Ok(spec)
    }

    pub(crate) fn validate_at(&self, prefix: &str) -> Result<(), ConfigError> {
        non_negative(&format!("{prefix}.compute_req"), self.compute_req)?;
        non_negative(&format!("{prefix}.storage_req"), self.storage_req)?;
        if self.compute_req <= 0.0 && self.storage_req <= 0.0 {
            return Err(ConfigError::new(
                format!("{prefix}.compute_req"),
                "and storage_req must not both be 0",
            ));
        }
        non_negative(&format!("{prefix}.local_arrival_rate"), self.local_arrival_rate)?;
        non_negative(&format!("{prefix}.local_departure_rate"), self.local_departure_rate)?;
        non_negative(&format!("{prefix}.migrated_arrival_rate"), self.migrated_arrival_rate)?;
        non_negative(
            &format!("{prefix}.migrated_departure_rate"),
            self.migrated_departure_rate,
        )?;
        if self.local_arrival_rate > 0.0 && self.local_departure_rate <= 0.0 {
            return Err(ConfigError::new(
                format!("{prefix}.local_departure_rate"),
                "must be > 0 when local_arrival_rate > 0",
            ));
        }
        if self.migrated_arrival_rate > 0.0 && self.migrated_departure_rate <= 0.0 {
            return Err(ConfigError::new(
                format!("{prefix}.migrated_departure_rate"),
                "must be > 0 when migrated_arrival_rate > 0",
            ));
        }
        Ok(())
    }
}

/// Local and migrated VM counts per class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupancyState {
    pub local_counts: Vec<u32>,
    pub migrated_counts: Vec<u32>,
}

impl OccupancyState {
    pub fn empty(classes: usize) -> Self {
        Self {
            local_counts: vec![0; classes],
            migrated_counts: vec![0; classes],
        }
    }

    pub fn local_usage(&self, classes: &[VmClassSpec]) -> (f64, f64) {
        usage(classes, |k| self.local_counts[k])
    }

    pub fn total_usage(&self, classes: &[VmClassSpec]) -> (f64, f64) {
        usage(classes, |k| self.local_counts[k] + self.migrated_counts[k])
    }

    /// Local VMs within the common resources and all VMs within the totals.
    pub fn is_feasible(&self, classes: &[VmClassSpec], capacity: &Capacity) -> bool {
        let (lc, lm) = self.local_usage(classes);
        let (tc, tm) = self.total_usage(classes);
        fits(lc, capacity.compute_common())
            && fits(lm, capacity.storage_common())
            && fits(tc, capacity.compute_total())
            && fits(tm, capacity.storage_total())
    }
}

fn usage(classes: &[VmClassSpec], count: impl Fn(usize) -> u32) -> (f64, f64) {
    classes.iter().enumerate().fold((0.0, 0.0), |(c, m), (k, spec)| {
        let n = f64::from(count(k));
        (c + n * spec.compute_req, m + n * spec.storage_req)
    })
}

/// Blocking and dropping figures derived from a stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossMetrics {
    pub blocking_rate: f64,
    pub dropping_rate: f64,
    pub blocking_probability: f64,
    pub dropping_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub states: Vec<OccupancyState>,
    pub probabilities: Vec<f64>,
    /// `max |(pi Q)_j|` of the solved system.
    pub residual: f64,
    /// Filled in by [`crate::reservation::analyze`].
    pub metrics: Option<LossMetrics>,
}

/// Point estimate with a Student-t 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ScenarioCounts {
    pub inter_cloudlet: u64,
    pub intra_cloudlet_handoff: u64,
    pub to_vehicular_cloud: u64,
    pub to_central_cloud: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub blocking_rate: Estimate,
    pub dropping_rate: Estimate,
    pub blocking_probability: Estimate,
    pub dropping_probability: Estimate,
    pub compute_utilization: Estimate,
    pub storage_utilization: Estimate,
    /// Time-averaged number of resident VMs (local + migrated) per class.
    pub mean_occupancy: Vec<Estimate>,
    pub scenarios: ScenarioCounts,
    pub replications: usize,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_capacity_is_valid() {
        let cap = Capacity::new(50.0, 100.0, 0.0, 0.0).unwrap();
        assert_eq!(cap.compute_common(), 50.0);
        assert_eq!(cap.storage_common(), 100.0);
    }

    #[test]
    fn full_compute_reservation_rejected() {
        let err = Capacity::new(50.0, 100.0, 50.0, 0.0).unwrap_err();
        assert_eq!(err.path, "capacity.compute_reserved");
        assert!(err.to_string().contains("common compute resources empty"));
    }

    #[test]
    fn fig5_class_is_valid() {
        VmClassSpec::new(20.0, 15.0, 0.1, 2.0, 0.05, 0.1).unwrap();
    }

    #[test]
    fn class_needs_departures_when_arrivals() {
        let err = VmClassSpec::new(1.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap_err();
        assert_eq!(err.path, "class.local_departure_rate");
        assert!(VmClassSpec::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn game_config_checks_floor() {
        let cap = Capacity::unreserved(50.0, 100.0).unwrap();
        let p = VmGameParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(GameConfig::with_options(cap, vec![p], 0.06, 1e-6, 10, UpdateOrder::Sequential).is_err());
        assert!(GameConfig::with_options(cap, vec![p], 0.05, 1e-6, 10, UpdateOrder::Sequential).is_ok());
        let err = GameConfig::new(cap, vec![]).unwrap_err();
        assert_eq!(err.path, "game.players");
        let bad = VmGameParams { alpha: 1.0, beta: 1.0, price_compute: 0.0, price_storage: 1.0 };
        let err = GameConfig::new(cap, vec![p, bad]).unwrap_err();
        assert_eq!(err.to_string(), "game.players[1].price_compute must be > 0");
    }

    #[test]
    fn feasibility_checks_both_partitions() {
        let cap = Capacity::new(50.0, 100.0, 10.0, 0.0).unwrap();
        let classes = [VmClassSpec::new(20.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap()];
        let s = |l, g| OccupancyState { local_counts: vec![l], migrated_counts: vec![g] };
        assert!(s(2, 0).is_feasible(&classes, &cap));
        assert!(s(0, 2).is_feasible(&classes, &cap));
        assert!(!s(3, 0).is_feasible(&classes, &cap));
        assert!(!s(1, 2).is_feasible(&classes, &cap));
    }
}
