use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::{estimate, stream_rng, EventKind, EventQueue, EventRecord, LossSimParams, Outcome};
use crate::model::{ScenarioCounts, SimReport};
use crate::reservation::{local_admissible, migrated_admissible, RateModel};

#[derive(Debug, Clone, Copy)]
enum LossEvent {
    Arrival { class: usize, migrated: bool },
    Departure { class: usize, migrated: bool },
}

/// Measurements of one independent replication.
///
/// Arrival, blocking and dropping counts and the time averages cover the
/// post-warm-up window only; the admission/departure/resident counters
/// cover the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub local_arrivals: u64,
    pub blocked: u64,
    pub migrated_arrivals: u64,
    pub dropped: u64,
    pub blocking_rate: f64,
    pub dropping_rate: f64,
    pub blocking_probability: f64,
    pub dropping_probability: f64,
    pub compute_utilization: f64,
    pub storage_utilization: f64,
    pub mean_occupancy: Vec<f64>,
    pub admitted_local: u64,
    pub departed_local: u64,
    pub resident_local: u64,
    pub admitted_migrated: u64,
    pub departed_migrated: u64,
    pub resident_migrated: u64,
    pub events: Vec<EventRecord>,
}

fn stream_id(class: usize, migrated: bool, departure: bool) -> u64 {
    (class as u64) * 4 + u64::from(migrated) + 2 * u64::from(departure)
}

fn exp(rate: f64) -> Option<Exp<f64>> {
    (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"))
}

/// Simulate one replication of the loss model.
pub fn simulate_replication(
    model: &RateModel,
    params: &LossSimParams,
    replication: usize,
    record_events: bool,
) -> ReplicationResult {
    let classes = model.classes();
    let capacity = model.capacity();
    let k = classes.len();

    let mut arrival_rngs = Vec::with_capacity(2 * k);
    let mut departure_rngs = Vec::with_capacity(2 * k);
    for class in 0..k {
        for migrated in [false, true] {
            arrival_rngs.push(stream_rng(params.seed, replication, stream_id(class, migrated, false)));
            departure_rngs.push(stream_rng(params.seed, replication, stream_id(class, migrated, true)));
        }
    }
    let slot = |class: usize, migrated: bool| 2 * class + usize::from(migrated);
    let arrival_dist: Vec<Option<Exp<f64>>> = (0..2 * k)
        .map(|s| {
            let spec = &classes[s / 2];
            exp(if s % 2 == 1 { spec.migrated_arrival_rate } else { spec.local_arrival_rate })
        })
        .collect();
    let departure_dist: Vec<Option<Exp<f64>>> = (0..2 * k)
        .map(|s| {
            let spec = &classes[s / 2];
            exp(if s % 2 == 1 { spec.migrated_departure_rate } else { spec.local_departure_rate })
        })
        .collect();

    let mut queue = EventQueue::new();
    for class in 0..k {
        for migrated in [false, true] {
            let s = slot(class, migrated);
            if let Some(d) = &arrival_dist[s] {
                let t = d.sample(&mut arrival_rngs[s]);
                if t <= params.horizon {
                    queue.push(t, LossEvent::Arrival { class, migrated });
                }
            }
        }
    }

    let mut state = crate::model::OccupancyState::empty(k);
    let mut events = Vec::new();
    let mut r = ReplicationResult {
        local_arrivals: 0,
        blocked: 0,
        migrated_arrivals: 0,
        dropped: 0,
        blocking_rate: 0.0,
        dropping_rate: 0.0,
        blocking_probability: 0.0,
        dropping_probability: 0.0,
        compute_utilization: 0.0,
        storage_utilization: 0.0,
        mean_occupancy: vec![0.0; k],
        admitted_local: 0,
        departed_local: 0,
        resident_local: 0,
        admitted_migrated: 0,
        departed_migrated: 0,
        resident_migrated: 0,
        events: Vec::new(),
    };
    let mut area_c = 0.0;
    let mut area_m = 0.0;
    let mut area_n = vec![0.0; k];
    let mut last = 0.0;

    let mut advance = |to: f64, state: &crate::model::OccupancyState, last: &mut f64| {
        let span = (to - params.warmup.max(*last)).max(0.0);
        if span > 0.0 {
            let (uc, um) = state.total_usage(classes);
            area_c += uc * span;
            area_m += um * span;
            for (c, a) in area_n.iter_mut().enumerate() {
                *a += f64::from(state.local_counts[c] + state.migrated_counts[c]) * span;
            }
        }
        *last = to;
    };

    while let Some(time) = queue.peek_time() {
        if time > params.horizon {
            break;
        }
        let (time, event) = queue.pop().expect("peeked");
        debug_assert!(time >= last, "event times must not decrease");
        advance(time, &state, &mut last);
        let measured = time >= params.warmup;
        let (kind, class, outcome) = match event {
            LossEvent::Arrival { class, migrated } => {
                let s = slot(class, migrated);
                if let Some(d) = &arrival_dist[s] {
                    let next = time + d.sample(&mut arrival_rngs[s]);
                    if next <= params.horizon {
                        queue.push(next, LossEvent::Arrival { class, migrated });
                    }
                }
                let admissible = if migrated {
                    migrated_admissible(&state, class, classes, capacity)
                } else {
                    local_admissible(&state, class, classes, capacity)
                };
                if measured {
                    if migrated {
                        r.migrated_arrivals += 1;
                    } else {
                        r.local_arrivals += 1;
                    }
                }
                if admissible {
                    if migrated {
                        state.migrated_counts[class] += 1;
                        r.admitted_migrated += 1;
                    } else {
                        state.local_counts[class] += 1;
                        r.admitted_local += 1;
                    }
                    let life = departure_dist[s]
                        .as_ref()
                        .expect("validated: departures positive when arrivals are")
                        .sample(&mut departure_rngs[s]);
                    queue.push(time + life, LossEvent::Departure { class, migrated });
                    debug_assert!(state.is_feasible(classes, capacity));
                    let kind = if migrated { EventKind::MigratedArrival } else { EventKind::LocalArrival };
                    (kind, class, Outcome::Admitted)
                } else if migrated {
                    if measured {
                        r.dropped += 1;
                    }
                    (EventKind::MigratedArrival, class, Outcome::Dropped)
                } else {
                    if measured {
                        r.blocked += 1;
                    }
                    (EventKind::LocalArrival, class, Outcome::Blocked)
                }
            }
            LossEvent::Departure { class, migrated } => {
                if migrated {
                    state.migrated_counts[class] -= 1;
                    r.departed_migrated += 1;
                    (EventKind::MigratedDeparture, class, Outcome::Completed)
                } else {
                    state.local_counts[class] -= 1;
                    r.departed_local += 1;
                    (EventKind::LocalDeparture, class, Outcome::Completed)
                }
            }
        };
        if record_events {
            events.push(EventRecord {
                time,
                kind,
                class_index: class,
                outcome,
                cloudlet: 0,
                vehicle_id: None,
            });
        }
    }
    advance(params.horizon, &state, &mut last);

    let window = params.horizon - params.warmup;
    let frac = |num: u64, den: u64| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    r.blocking_rate = r.blocked as f64 / window;
    r.dropping_rate = r.dropped as f64 / window;
    r.blocking_probability = frac(r.blocked, r.local_arrivals);
    r.dropping_probability = frac(r.dropped, r.migrated_arrivals);
    r.compute_utilization = area_c / window / capacity.compute_total();
    r.storage_utilization = area_m / window / capacity.storage_total();
    r.mean_occupancy = area_n.iter().map(|a| a / window).collect();
    r.resident_local = state.local_counts.iter().map(|&n| u64::from(n)).sum();
    r.resident_migrated = state.migrated_counts.iter().map(|&n| u64::from(n)).sum();
    r.events = events;
    r
}

/// Independent replications of the loss model, aggregated into 95%
/// Student-t intervals. Replications run in parallel; aggregation follows
/// replication order, so the report depends only on the inputs.
pub fn run_loss_sim(model: &RateModel, params: &LossSimParams) -> SimReport {
    let reps: Vec<ReplicationResult> = (0..params.replications)
        .into_par_iter()
        .map(|i| simulate_replication(model, params, i, false))
        .collect();
    let col = |f: &dyn Fn(&ReplicationResult) -> f64| reps.iter().map(f).collect::<Vec<_>>();
    SimReport {
        blocking_rate: estimate(&col(&|r| r.blocking_rate)),
        dropping_rate: estimate(&col(&|r| r.dropping_rate)),
        blocking_probability: estimate(&col(&|r| r.blocking_probability)),
        dropping_probability: estimate(&col(&|r| r.dropping_probability)),
        compute_utilization: estimate(&col(&|r| r.compute_utilization)),
        storage_utilization: estimate(&col(&|r| r.storage_utilization)),
        mean_occupancy: (0..model.num_classes())
            .map(|k| estimate(&col(&|r| r.mean_occupancy[k])))
            .collect(),
        scenarios: ScenarioCounts::default(),
        replications: params.replications,
        seed: params.seed,
    }
}

/// Event log of the first replication.
pub fn loss_event_log(model: &RateModel, params: &LossSimParams) -> Vec<EventRecord> {
    simulate_replication(model, params, 0, true).events
}
