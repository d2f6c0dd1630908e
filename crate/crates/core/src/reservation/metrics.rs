use super::{local_admissible, migrated_admissible, RateModel};
use crate::model::{LossMetrics, OccupancyState, SteadyStateSolution};

/// State blocks a local arrival of class `k`.
pub fn in_blocking_set(state: &OccupancyState, k: usize, model: &RateModel) -> bool {
    !local_admissible(state, k, model.classes(), model.capacity())
}

/// State drops a migrated arrival of class `k`.
pub fn in_dropping_set(state: &OccupancyState, k: usize, model: &RateModel) -> bool {
    !migrated_admissible(state, k, model.classes(), model.capacity())
}

fn ratio(rate: f64, offered: f64) -> f64 {
    if offered > 0.0 {
        rate / offered
    } else {
        0.0
    }
}

/// `(R_b, R_b / sum_k lambda_k^l)`: rate of refused local arrivals and the
/// fraction of local arrivals refused.
pub fn blocking_rate(solution: &SteadyStateSolution, model: &RateModel) -> (f64, f64) {
    let mut rate = 0.0;
    for (k, spec) in model.classes().iter().enumerate() {
        if spec.local_arrival_rate == 0.0 {
            continue;
        }
        for (s, &p) in solution.states.iter().zip(&solution.probabilities) {
            if p > 0.0 && in_blocking_set(s, k, model) {
                rate += p * spec.local_arrival_rate;
            }
        }
    }
    (rate, ratio(rate, model.total_local_arrival_rate()))
}

/// `(R_d, R_d / sum_k lambda_k^g)` for migrated arrivals.
pub fn dropping_rate(solution: &SteadyStateSolution, model: &RateModel) -> (f64, f64) {
    let mut rate = 0.0;
    for (k, spec) in model.classes().iter().enumerate() {
        if spec.migrated_arrival_rate == 0.0 {
            continue;
        }
        for (s, &p) in solution.states.iter().zip(&solution.probabilities) {
            if p > 0.0 && in_dropping_set(s, k, model) {
                rate += p * spec.migrated_arrival_rate;
            }
        }
    }
    (rate, ratio(rate, model.total_migrated_arrival_rate()))
}

pub fn loss_metrics(solution: &SteadyStateSolution, model: &RateModel) -> LossMetrics {
    let (blocking_rate, blocking_probability) = blocking_rate(solution, model);
    let (dropping_rate, dropping_probability) = dropping_rate(solution, model);
    LossMetrics {
        blocking_rate,
        dropping_rate,
        blocking_probability,
        dropping_probability,
    }
}

/// Expected number of resident VMs (local + migrated) per class.
pub fn mean_occupancy(solution: &SteadyStateSolution, model: &RateModel) -> Vec<f64> {
    (0..model.num_classes())
        .map(|k| {
            solution
                .states
                .iter()
                .zip(&solution.probabilities)
                .map(|(s, &p)| p * f64::from(s.local_counts[k] + s.migrated_counts[k]))
                .sum()
        })
        .collect()
}

/// Expected fraction of compute and storage in use.
pub fn utilization(solution: &SteadyStateSolution, model: &RateModel) -> (f64, f64) {
    let cap = model.capacity();
    let (c, m) = solution
        .states
        .iter()
        .zip(&solution.probabilities)
        .fold((0.0, 0.0), |(c, m), (s, &p)| {
            let (uc, um) = s.total_usage(model.classes());
            (c + p * uc, m + p * um)
        });
    (c / cap.compute_total(), m / cap.storage_total())
}
