use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::Generator;
use crate::error::ReservationError;
use crate::model::{OccupancyState, SteadyStateSolution};

/// Accepted residual: `max |(pi Q)_j| <= RESIDUAL_TOLERANCE * max |Q_ij|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest reachable component solved by dense LU; larger ones use
    /// Gauss-Seidel sweeps.
    pub dense_limit: usize,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_limit: 2_000,
            max_sweeps: 200_000,
        }
    }
}

/// Stationary distribution of `q`, computed on the component reachable from
/// the first (all-empty) state. Unreachable states get probability zero.
pub fn solve_steady_state(q: &Generator, states: Vec<OccupancyState>) -> Result<SteadyStateSolution, ReservationError> {
    solve_steady_state_with(q, states, &SolverOptions::default())
}

pub fn solve_steady_state_with(
    q: &Generator,
    states: Vec<OccupancyState>,
    options: &SolverOptions,
) -> Result<SteadyStateSolution, ReservationError> {
    assert_eq!(q.len(), states.len(), "generator and state list disagree");
    let n = q.len();
    let reachable = reachable_from(q, 0);
    let mut local = vec![usize::MAX; n];
    for (pos, &i) in reachable.iter().enumerate() {
        local[i] = pos;
    }

    let sub = if reachable.len() == 1 {
        vec![1.0]
    } else if reachable.len() <= options.dense_limit {
        dense_solve(q, &reachable, &local)?
    } else {
        gauss_seidel(q, &reachable, &local, options.max_sweeps)?
    };

    let mut probabilities = vec![0.0; n];
    for (pos, &i) in reachable.iter().enumerate() {
        probabilities[i] = sub[pos].max(0.0);
    }
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);

    let residual = residual(q, &probabilities);
    let scale = q.max_abs();
    if !(residual <= RESIDUAL_TOLERANCE * scale) {
        return Err(ReservationError::Singular { residual });
    }
    Ok(SteadyStateSolution {
        states,
        probabilities,
        residual,
        metrics: None,
    })
}

pub(crate) fn residual(q: &Generator, pi: &[f64]) -> f64 {
    q.left_multiply(pi).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn reachable_from(q: &Generator, start: usize) -> Vec<usize> {
    let mut seen = vec![false; q.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for &(j, _) in q.row(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    (0..q.len()).filter(|&i| seen[i]).collect()
}

/// Solve `pi Q = 0` with the last balance equation replaced by `sum(pi) = 1`.
fn dense_solve(q: &Generator, reachable: &[usize], local: &[usize]) -> Result<Vec<f64>, ReservationError> {
    let n = reachable.len();
    // a = Q^T restricted to the reachable set.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (row, &i) in reachable.iter().enumerate() {
        a[(row, row)] = q.diagonal(i);
        for &(j, r) in q.row(i) {
            a[(local[j], row)] = r;
        }
    }
    for col in 0..n {
        a[(n - 1, col)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or(ReservationError::Singular { residual: f64::INFINITY })
}

fn gauss_seidel(
    q: &Generator,
    reachable: &[usize],
    local: &[usize],
    max_sweeps: usize,
) -> Result<Vec<f64>, ReservationError> {
    let n = reachable.len();
    // Incoming transitions per local state.
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (pos, &i) in reachable.iter().enumerate() {
        for &(j, r) in q.row(i) {
            incoming[local[j]].push((pos, r));
        }
    }
    let diag: Vec<f64> = reachable.iter().map(|&i| q.diagonal(i)).collect();
    if diag.iter().any(|&d| d >= 0.0) {
        return Err(ReservationError::Singular { residual: f64::INFINITY });
    }
    let scale = q.max_abs();
    let mut pi = vec![1.0 / n as f64; n];
    let mut full = vec![0.0; q.len()];
    let mut last_residual = f64::INFINITY;
    for sweep in 0..max_sweeps {
        for j in 0..n {
            let inflow: f64 = incoming[j].iter().map(|&(i, r)| pi[i] * r).sum();
            pi[j] = inflow / -diag[j];
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 10 == 9 {
            for (pos, &i) in reachable.iter().enumerate() {
                full[i] = pi[pos];
            }
            last_residual = residual(q, &full);
            if last_residual <= 1e-3 * RESIDUAL_TOLERANCE * scale {
                return Ok(pi);
            }
        }
    }
    if last_residual <= RESIDUAL_TOLERANCE * scale {
        Ok(pi)
    } else {
        Err(ReservationError::Singular { residual: last_residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, VmClassSpec};
    use crate::reservation::{build_generator, enumerate_states, RateModel};

    fn solve(model: &RateModel, options: &SolverOptions) -> SteadyStateSolution {
        let states = enumerate_states(model).unwrap();
        let q = build_generator(model, &states);
        solve_steady_state_with(&q, states.into_states(), options).unwrap()
    }

    fn local_only(pi: &SteadyStateSolution) -> Vec<f64> {
        pi.states
            .iter()
            .zip(&pi.probabilities)
            .filter(|(s, _)| s.migrated_counts.iter().all(|&g| g == 0))
            .map(|(_, &p)| p)
            .collect()
    }

    #[test]
    fn mm22_distribution() {
        let cap = Capacity::unreserved(2.0, 1.0).unwrap();
        let model = RateModel::new(vec![VmClassSpec::new(1.0, 0.0, 1.0, 1.0, 0.0, 0.0).unwrap()], cap).unwrap();
        let sol = solve(&model, &SolverOptions::default());
        let pi = local_only(&sol);
        // (1, 1, 1/2) / 2.5
        for (p, e) in pi.iter().zip([0.4, 0.4, 0.2]) {
            assert!((p - e).abs() < 1e-12, "{pi:?}");
        }
        assert_eq!(sol.probabilities.iter().filter(|&&p| p > 0.0).count(), 3);
    }

    #[test]
    fn single_state() {
        let cap = Capacity::unreserved(10.0, 10.0).unwrap();
        let model = RateModel::new(vec![VmClassSpec::new(20.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()], cap).unwrap();
        let sol = solve(&model, &SolverOptions::default());
        assert_eq!(sol.probabilities, vec![1.0]);
    }

    #[test]
    fn absorbing_empty_state() {
        let cap = Capacity::unreserved(50.0, 100.0).unwrap();
        let model = RateModel::new(vec![VmClassSpec::new(20.0, 15.0, 0.0, 2.0, 0.0, 0.1).unwrap()], cap).unwrap();
        let sol = solve(&model, &SolverOptions::default());
        assert_eq!(sol.probabilities[0], 1.0);
        assert_eq!(sol.probabilities.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn gauss_seidel_matches_dense() {
        let cap = Capacity::new(60.0, 120.0, 10.0, 20.0).unwrap();
        let classes = vec![
            VmClassSpec::new(4.0, 7.0, 1.5, 0.5, 0.4, 0.3).unwrap(),
            VmClassSpec::new(9.0, 5.0, 0.7, 0.4, 0.2, 0.2).unwrap(),
        ];
        let model = RateModel::new(classes, cap).unwrap();
        let dense = solve(&model, &SolverOptions::default());
        let iterative = solve(&model, &SolverOptions { dense_limit: 0, max_sweeps: 200_000 });
        assert!(dense.probabilities.len() > 100);
        for (a, b) in dense.probabilities.iter().zip(&iterative.probabilities) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
