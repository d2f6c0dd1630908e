//! Vehicles on a one-dimensional road served by roadside units (RSUs).
//!
//! Every vehicle holds one VM. It is created as a local VM at the cloudlet of
//! the first RSU. Crossing into an RSU attached to the same cloudlet is a
//! plain radio handoff; crossing into another cloudlet's RSU is a migration
//! attempt, admitted or dropped by the target's reservation rules. A dropped
//! VM moves to a neighbouring vehicular cloud with probability `p_v`,
//! otherwise to the central cloud (unbounded). VMs hosted off the roadside
//! try to migrate back at every later cloudlet change.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use super::{estimate, stream_rng, EventKind, EventQueue, EventRecord, Outcome};
use crate::error::{ConfigError, SimError};
use crate::model::{Capacity, Estimate, OccupancyState, ScenarioCounts, SimReport, VmClassSpec};
use crate::reservation::{local_admissible, migrated_admissible};

/// Coverage interval `[start, end)` of one RSU and the cloudlet behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rsu {
    pub start: f64,
    pub end: f64,
    pub cloudlet: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorConfig {
    rsus: Vec<Rsu>,
    road_length: f64,
    vehicle_arrival_rate: f64,
    speed_range: (f64, f64),
    vehicular_cloud_probability: f64,
}

impl CorridorConfig {
    pub fn new(
        rsus: Vec<Rsu>,
        road_length: f64,
        vehicle_arrival_rate: f64,
        speed_range: (f64, f64),
        vehicular_cloud_probability: f64,
    ) -> Result<Self, ConfigError> {
        if rsus.is_empty() {
            return Err(ConfigError::new("corridor.rsus", "must contain at least one RSU"));
        }
        if !(road_length.is_finite() && road_length > 0.0) {
            return Err(ConfigError::new("corridor.road_length", "must be > 0"));
        }
        let mut prev_end = 0.0;
        for (i, r) in rsus.iter().enumerate() {
            if !(r.start >= prev_end) {
                return Err(ConfigError::new(
                    format!("corridor.rsus[{i}].start"),
                    "must be >= 0 and >= the previous RSU's end (sorted, non-overlapping)",
                ));
            }
            if !(r.end > r.start) {
                return Err(ConfigError::new(format!("corridor.rsus[{i}].end"), "must be > start"));
            }
            if r.end > road_length {
                return Err(ConfigError::new(format!("corridor.rsus[{i}].end"), "must be <= road_length"));
            }
            prev_end = r.end;
        }
        if !(vehicle_arrival_rate.is_finite() && vehicle_arrival_rate >= 0.0) {
            return Err(ConfigError::new("corridor.vehicle_arrival_rate", "must be >= 0"));
        }
        let (lo, hi) = speed_range;
        if !(lo.is_finite() && lo > 0.0) {
            return Err(ConfigError::new("corridor.speed_min", "must be > 0"));
        }
        if !(hi.is_finite() && hi >= lo) {
            return Err(ConfigError::new("corridor.speed_max", "must be >= speed_min"));
        }
        if !(0.0..=1.0).contains(&vehicular_cloud_probability) {
            return Err(ConfigError::new("corridor.vehicular_cloud_probability", "must be in [0, 1]"));
        }
        Ok(Self {
            rsus,
            road_length,
            vehicle_arrival_rate,
            speed_range,
            vehicular_cloud_probability,
        })
    }

    pub fn rsus(&self) -> &[Rsu] {
        &self.rsus
    }
    pub fn road_length(&self) -> f64 {
        self.road_length
    }
    pub fn vehicle_arrival_rate(&self) -> f64 {
        self.vehicle_arrival_rate
    }
    pub fn speed_range(&self) -> (f64, f64) {
        self.speed_range
    }
    pub fn vehicular_cloud_probability(&self) -> f64 {
        self.vehicular_cloud_probability
    }

    /// Distinct cloudlet ids in ascending order.
    pub fn cloudlets(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.rsus.iter().map(|r| r.cloudlet).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn rsu(&self, index: usize) -> Result<&Rsu, SimError> {
        self.rsus.get(index).ok_or(SimError::UnknownRsu {
            index,
            count: self.rsus.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admitted,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MigrationScenario {
    /// RSUs on different cloudlets, VM moved to the target cloudlet.
    InterCloudlet,
    /// RSUs on the same cloudlet: radio handoff only.
    IntraCloudlet,
    /// Target refused the VM; a neighbouring vehicular cloud hosts it.
    ToVehicularCloud,
    /// Target refused the VM; the central cloud hosts it.
    ToCentralCloud,
}

/// Scenario of a boundary crossing from `source_rsu` to `target_rsu`.
///
/// `admission` is ignored for same-cloudlet crossings. For a refused
/// migration, a `fallback_draw` in `[0, 1)` below `p_v` selects the
/// vehicular cloud.
pub fn classify_migration(
    corridor: &CorridorConfig,
    source_rsu: usize,
    target_rsu: usize,
    admission: Admission,
    fallback_draw: f64,
) -> Result<MigrationScenario, SimError> {
    let source = corridor.rsu(source_rsu)?;
    let target = corridor.rsu(target_rsu)?;
    Ok(if source.cloudlet == target.cloudlet {
        MigrationScenario::IntraCloudlet
    } else {
        match admission {
            Admission::Admitted => MigrationScenario::InterCloudlet,
            Admission::Dropped if fallback_draw < corridor.vehicular_cloud_probability => {
                MigrationScenario::ToVehicularCloud
            }
            Admission::Dropped => MigrationScenario::ToCentralCloud,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Host {
    Cloudlet { id: usize, migrated: bool },
    Vehicular,
    Central,
}

#[derive(Debug, Clone, Copy)]
enum VehicleEvent {
    Spawn,
    Enter { vehicle: usize, rsu: usize },
    Exit { vehicle: usize },
}

/// Per-vehicle accounting of one corridor run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleTrace {
    pub id: u64,
    pub speed: f64,
    pub entry_time: f64,
    /// Boundary crossings between consecutive RSUs seen before the horizon.
    pub crossings: u32,
    pub handoffs: u32,
    pub migration_attempts: u32,
    pub entry_blocked: bool,
    /// Left the road before the horizon.
    pub completed: bool,
    /// Time spent in each RSU's coverage (only for RSUs fully traversed).
    pub residence_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorRun {
    pub report: SimReport,
    pub events: Vec<EventRecord>,
    pub vehicles: Vec<VehicleTrace>,
    pub entry_blocked: u64,
    pub migration_attempts: u64,
    pub migrations_dropped: u64,
}

struct Site {
    state: OccupancyState,
}

/// Single-replication corridor run over `[0, horizon]`.
pub fn run_corridor_sim(
    corridor: &CorridorConfig,
    vm_class: usize,
    classes: &[VmClassSpec],
    cloudlet_capacity: &Capacity,
    horizon: f64,
    seed: u64,
) -> Result<CorridorRun, SimError> {
    if vm_class >= classes.len() {
        return Err(SimError::UnknownClass {
            index: vm_class,
            count: classes.len(),
        });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(ConfigError::new("horizon", "must be > 0").into());
    }
    let k = classes.len();
    let mut arrivals_rng = stream_rng(seed, 0, 0);
    let mut speed_rng = stream_rng(seed, 0, 1);
    let mut fallback_rng = stream_rng(seed, 0, 2);
    let interarrival = (corridor.vehicle_arrival_rate > 0.0)
        .then(|| Exp::new(corridor.vehicle_arrival_rate).expect("positive rate"));

    let mut sites: BTreeMap<usize, Site> = corridor
        .cloudlets()
        .into_iter()
        .map(|id| (id, Site { state: OccupancyState::empty(k) }))
        .collect();

    let mut queue = EventQueue::new();
    if let Some(d) = &interarrival {
        let t = d.sample(&mut arrivals_rng);
        if t <= horizon {
            queue.push(t, VehicleEvent::Spawn);
        }
    }

    let mut vehicles: Vec<VehicleTrace> = Vec::new();
    let mut hosts: Vec<Host> = Vec::new();
    let mut events = Vec::new();
    let mut scenarios = ScenarioCounts::default();
    let (mut entries, mut entry_blocked, mut attempts, mut dropped) = (0u64, 0u64, 0u64, 0u64);
    let mut area_c = 0.0;
    let mut area_m = 0.0;
    let mut area_n = vec![0.0; k];
    let mut last = 0.0;

    let release = |sites: &mut BTreeMap<usize, Site>, host: Host| -> Option<(usize, EventKind)> {
        if let Host::Cloudlet { id, migrated } = host {
            let st = &mut sites.get_mut(&id).expect("known cloudlet").state;
            if migrated {
                st.migrated_counts[vm_class] -= 1;
                Some((id, EventKind::MigratedDeparture))
            } else {
                st.local_counts[vm_class] -= 1;
                Some((id, EventKind::LocalDeparture))
            }
        } else {
            None
        }
    };

    while let Some(time) = queue.peek_time() {
        if time > horizon {
            break;
        }
        let (time, event) = queue.pop().expect("peeked");
        let span = time - last;
        for site in sites.values() {
            let (uc, um) = site.state.total_usage(classes);
            area_c += uc * span;
            area_m += um * span;
            for (c, a) in area_n.iter_mut().enumerate() {
                *a += f64::from(site.state.local_counts[c] + site.state.migrated_counts[c]) * span;
            }
        }
        last = time;

        match event {
            VehicleEvent::Spawn => {
                if let Some(d) = &interarrival {
                    let next = time + d.sample(&mut arrivals_rng);
                    if next <= horizon {
                        queue.push(next, VehicleEvent::Spawn);
                    }
                }
                let (lo, hi) = corridor.speed_range;
                let speed = if hi > lo { speed_rng.random_range(lo..hi) } else { lo };
                let vehicle = vehicles.len();
                vehicles.push(VehicleTrace {
                    id: vehicle as u64,
                    speed,
                    entry_time: time,
                    crossings: 0,
                    handoffs: 0,
                    migration_attempts: 0,
                    entry_blocked: false,
                    completed: false,
                    residence_times: Vec::new(),
                });
                hosts.push(Host::Central);
                for (rsu, r) in corridor.rsus.iter().enumerate() {
                    queue.push(time + r.start / speed, VehicleEvent::Enter { vehicle, rsu });
                }
                queue.push(time + corridor.road_length / speed, VehicleEvent::Exit { vehicle });
            }
            VehicleEvent::Enter { vehicle, rsu: 0 } => {
                entries += 1;
                let id = corridor.rsus[0].cloudlet;
                let site = &mut sites.get_mut(&id).expect("known cloudlet").state;
                let outcome = if local_admissible(site, vm_class, classes, cloudlet_capacity) {
                    site.local_counts[vm_class] += 1;
                    hosts[vehicle] = Host::Cloudlet { id, migrated: false };
                    Outcome::Admitted
                } else {
                    entry_blocked += 1;
                    vehicles[vehicle].entry_blocked = true;
                    hosts[vehicle] = Host::Central;
                    Outcome::Blocked
                };
                events.push(EventRecord {
                    time,
                    kind: EventKind::LocalArrival,
                    class_index: vm_class,
                    outcome,
                    cloudlet: id,
                    vehicle_id: Some(vehicle as u64),
                });
            }
            VehicleEvent::Enter { vehicle, rsu } => {
                let v = &mut vehicles[vehicle];
                v.crossings += 1;
                let prev = &corridor.rsus[rsu - 1];
                v.residence_times.push((prev.end - prev.start) / v.speed);
                let source_cloudlet = prev.cloudlet;
                let target = corridor.rsus[rsu].cloudlet;
                if source_cloudlet == target {
                    v.handoffs += 1;
                    let scenario = classify_migration(corridor, rsu - 1, rsu, Admission::Admitted, 1.0)?;
                    debug_assert_eq!(scenario, MigrationScenario::IntraCloudlet);
                    scenarios.intra_cloudlet_handoff += 1;
                    events.push(EventRecord {
                        time,
                        kind: EventKind::HandoffNoMigration,
                        class_index: vm_class,
                        outcome: Outcome::Completed,
                        cloudlet: target,
                        vehicle_id: Some(vehicle as u64),
                    });
                    continue;
                }
                v.migration_attempts += 1;
                attempts += 1;
                let old_host = hosts[vehicle];
                let site = &mut sites.get_mut(&target).expect("known cloudlet").state;
                let admission = if migrated_admissible(site, vm_class, classes, cloudlet_capacity) {
                    site.migrated_counts[vm_class] += 1;
                    Admission::Admitted
                } else {
                    dropped += 1;
                    Admission::Dropped
                };
                debug_assert!(site.is_feasible(classes, cloudlet_capacity));
                let draw = if admission == Admission::Dropped {
                    fallback_rng.random::<f64>()
                } else {
                    1.0
                };
                let scenario = classify_migration(corridor, rsu - 1, rsu, admission, draw)?;
                hosts[vehicle] = match scenario {
                    MigrationScenario::InterCloudlet => {
                        scenarios.inter_cloudlet += 1;
                        Host::Cloudlet { id: target, migrated: true }
                    }
                    MigrationScenario::ToVehicularCloud => {
                        scenarios.to_vehicular_cloud += 1;
                        Host::Vehicular
                    }
                    MigrationScenario::ToCentralCloud => {
                        scenarios.to_central_cloud += 1;
                        Host::Central
                    }
                    MigrationScenario::IntraCloudlet => unreachable!("different cloudlets"),
                };
                if let Some((id, kind)) = release(&mut sites, old_host) {
                    events.push(EventRecord {
                        time,
                        kind,
                        class_index: vm_class,
                        outcome: Outcome::Completed,
                        cloudlet: id,
                        vehicle_id: Some(vehicle as u64),
                    });
                }
                events.push(EventRecord {
                    time,
                    kind: EventKind::MigratedArrival,
                    class_index: vm_class,
                    outcome: if admission == Admission::Admitted { Outcome::Admitted } else { Outcome::Dropped },
                    cloudlet: target,
                    vehicle_id: Some(vehicle as u64),
                });
            }
            VehicleEvent::Exit { vehicle } => {
                let v = &mut vehicles[vehicle];
                v.completed = true;
                let lastr = corridor.rsus.last().expect("non-empty");
                v.residence_times.push((lastr.end - lastr.start) / v.speed);
                if let Some((id, kind)) = release(&mut sites, hosts[vehicle]) {
                    events.push(EventRecord {
                        time,
                        kind,
                        class_index: vm_class,
                        outcome: Outcome::Completed,
                        cloudlet: id,
                        vehicle_id: Some(vehicle as u64),
                    });
                }
            }
        }
    }
    let span = horizon - last;
    for site in sites.values() {
        let (uc, um) = site.state.total_usage(classes);
        area_c += uc * span;
        area_m += um * span;
        for (c, a) in area_n.iter_mut().enumerate() {
            *a += f64::from(site.state.local_counts[c] + site.state.migrated_counts[c]) * span;
        }
    }

    let n_sites = sites.len() as f64;
    let frac = |num: u64, den: u64| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    let single = |x: f64| estimate(&[x]);
    let report = SimReport {
        blocking_rate: single(entry_blocked as f64 / horizon),
        dropping_rate: single(dropped as f64 / horizon),
        blocking_probability: single(frac(entry_blocked, entries)),
        dropping_probability: single(frac(dropped, attempts)),
        compute_utilization: single(area_c / horizon / (n_sites * cloudlet_capacity.compute_total())),
        storage_utilization: single(area_m / horizon / (n_sites * cloudlet_capacity.storage_total())),
        mean_occupancy: area_n.iter().map(|a| single(a / horizon)).collect::<Vec<Estimate>>(),
        scenarios,
        replications: 1,
        seed,
    };
    Ok(CorridorRun {
        report,
        events,
        vehicles,
        entry_blocked,
        migration_attempts: attempts,
        migrations_dropped: dropped,
    })
}
