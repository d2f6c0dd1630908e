use serde::Serialize;

use super::{run_loss_sim, LossSimParams};
use crate::error::ReservationError;
use crate::model::Estimate;
use crate::reservation::{analyze, mean_occupancy, utilization, RateModel};

/// One metric computed both from the Markov chain and by simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub analytic: f64,
    pub simulated: Estimate,
    pub within_ci: bool,
}

impl ComparisonRow {
    fn new(metric: impl Into<String>, analytic: f64, simulated: Estimate) -> Self {
        Self {
            metric: metric.into(),
            analytic,
            within_ci: simulated.contains(analytic),
            simulated,
        }
    }
}

/// Blocking and dropping probabilities, compute utilization and per-class
/// mean occupancy, analytic value against the simulated 95% interval.
pub fn compare_analytic_vs_sim(
    model: &RateModel,
    params: &LossSimParams,
) -> Result<Vec<ComparisonRow>, ReservationError> {
    let solution = analyze(model)?;
    let metrics = solution.metrics.expect("analyze fills metrics");
    let (util_c, _) = utilization(&solution, model);
    let occupancy = mean_occupancy(&solution, model);
    let report = run_loss_sim(model, params);

    let mut rows = vec![
        ComparisonRow::new("blocking_probability", metrics.blocking_probability, report.blocking_probability),
        ComparisonRow::new("dropping_probability", metrics.dropping_probability, report.dropping_probability),
        ComparisonRow::new("compute_utilization", util_c, report.compute_utilization),
    ];
    for (k, (a, s)) in occupancy.iter().zip(&report.mean_occupancy).enumerate() {
        rows.push(ComparisonRow::new(format!("mean_occupancy_{k}"), *a, *s));
    }
    Ok(rows)
}
