use rayon::prelude::*;
use serde::Serialize;

use super::{analyze, RateModel};
use crate::error::ReservationError;

/// Loss figures of one reservation candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub compute_reserved: f64,
    pub storage_reserved: f64,
    pub states: usize,
    pub blocking_rate: f64,
    pub dropping_rate: f64,
    pub blocking_probability: f64,
    pub dropping_probability: f64,
    /// `blocking_rate <= constraint`
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome {
    pub blocking_constraint: f64,
    /// `None` when no candidate meets the blocking constraint.
    pub best: Option<GridRow>,
    /// Every candidate, in grid order.
    pub table: Vec<GridRow>,
}

impl OptimizationOutcome {
    pub fn is_feasible(&self) -> bool {
        self.best.is_some()
    }
}

/// Exhaustive search for the reservation `(C_r, M_r)` that minimizes the
/// dropping rate subject to `R_b <= blocking_constraint`.
///
/// The model's own reservation is ignored; only its totals are used. Ties in
/// `R_d` go to the smaller `C_r`, then the smaller `M_r`.
pub fn optimize_reservation(
    model: &RateModel,
    blocking_constraint: f64,
    grid: &[(f64, f64)],
) -> Result<OptimizationOutcome, ReservationError> {
    if grid.is_empty() {
        return Err(ReservationError::EmptyGrid);
    }
    let table = grid
        .par_iter()
        .map(|&(cr, mr)| {
            let capacity = model
                .capacity()
                .with_reservation(cr, mr)
                .map_err(|source| ReservationError::InvalidCandidate {
                    compute_reserved: cr,
                    storage_reserved: mr,
                    source,
                })?;
            let candidate = model.with_capacity(capacity);
            let solution = analyze(&candidate)?;
            let m = solution.metrics.expect("analyze attaches metrics");
            Ok(GridRow {
                compute_reserved: cr,
                storage_reserved: mr,
                states: solution.states.len(),
                blocking_rate: m.blocking_rate,
                dropping_rate: m.dropping_rate,
                blocking_probability: m.blocking_probability,
                dropping_probability: m.dropping_probability,
                feasible: m.blocking_rate <= blocking_constraint,
            })
        })
        .collect::<Result<Vec<_>, ReservationError>>()?;

    let best = table
        .iter()
        .filter(|r| r.feasible)
        .min_by(|a, b| {
            a.dropping_rate
                .total_cmp(&b.dropping_rate)
                .then(a.compute_reserved.total_cmp(&b.compute_reserved))
                .then(a.storage_reserved.total_cmp(&b.storage_reserved))
        })
        .copied();

    Ok(OptimizationOutcome {
        blocking_constraint,
        best,
        table,
    })
}
