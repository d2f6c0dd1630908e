use serde::Serialize;

use super::{allocate_shares, best_response_component, check_requests, sum_except, utility_unchecked};
use crate::error::GameError;
use crate::model::{AllocationProfile, GameConfig, UpdateOrder};

/// One player's state after a best-response round (round 0 is the start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub round: usize,
    pub player: usize,
    pub compute: f64,
    pub storage: f64,
    pub share_compute: f64,
    pub share_storage: f64,
    pub utility: f64,
}

/// Iterate best responses from the given initial requests until the largest
/// change in a round is at most `tolerance * max(C, M)`.
///
/// Running out of iterations is not an error: the last profile is returned
/// with `converged == false`.
pub fn solve_nash(
    config: &GameConfig,
    initial_compute: &[f64],
    initial_storage: &[f64],
) -> Result<AllocationProfile, GameError> {
    run(config, initial_compute, initial_storage, None)
}

/// [`solve_nash`] that also records every player's state after every round.
pub fn solve_nash_traced(
    config: &GameConfig,
    initial_compute: &[f64],
    initial_storage: &[f64],
) -> Result<(AllocationProfile, Vec<TrajectoryRow>), GameError> {
    let mut trace = Vec::new();
    let profile = run(config, initial_compute, initial_storage, Some(&mut trace))?;
    Ok((profile, trace))
}

fn run(
    config: &GameConfig,
    initial_compute: &[f64],
    initial_storage: &[f64],
    mut trace: Option<&mut Vec<TrajectoryRow>>,
) -> Result<AllocationProfile, GameError> {
    let n = config.num_players();
    let cap = *config.capacity();
    let (c_total, m_total) = (cap.compute_total(), cap.storage_total());
    check_requests("initial_compute", initial_compute, n, c_total)?;
    check_requests("initial_storage", initial_storage, n, m_total)?;

    let mut compute = initial_compute.to_vec();
    let mut storage = initial_storage.to_vec();
    let threshold = config.tolerance() * c_total.max(m_total);
    let floor = config.request_floor();

    if let Some(t) = trace.as_deref_mut() {
        record(t, 0, &compute, &storage, config)?;
    }

    let mut converged = false;
    let mut rounds = 0;
    while rounds < config.max_iterations() {
        rounds += 1;
        let mut max_delta: f64 = 0.0;
        match config.update_order() {
            UpdateOrder::Sequential => {
                for i in 0..n {
                    let p = &config.players()[i];
                    let c = best_response_component(p.alpha, p.price_compute, sum_except(&compute, i), c_total, floor);
                    let m = best_response_component(p.beta, p.price_storage, sum_except(&storage, i), m_total, floor);
                    max_delta = max_delta.max((c - compute[i]).abs()).max((m - storage[i]).abs());
                    compute[i] = c;
                    storage[i] = m;
                }
            }
            UpdateOrder::Simultaneous => {
                let next: Vec<(f64, f64)> = (0..n)
                    .map(|i| {
                        let p = &config.players()[i];
                        (
                            best_response_component(p.alpha, p.price_compute, sum_except(&compute, i), c_total, floor),
                            best_response_component(p.beta, p.price_storage, sum_except(&storage, i), m_total, floor),
                        )
                    })
                    .collect();
                for (i, (c, m)) in next.into_iter().enumerate() {
                    max_delta = max_delta.max((c - compute[i]).abs()).max((m - storage[i]).abs());
                    compute[i] = c;
                    storage[i] = m;
                }
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            record(t, rounds, &compute, &storage, config)?;
        }
        if max_delta <= threshold {
            converged = true;
            break;
        }
    }

    Ok(AllocationProfile {
        shares_compute: allocate_shares(&compute, c_total)?,
        shares_storage: allocate_shares(&storage, m_total)?,
        requests_compute: compute,
        requests_storage: storage,
        iterations_used: rounds,
        converged,
    })
}

fn record(
    trace: &mut Vec<TrajectoryRow>,
    round: usize,
    compute: &[f64],
    storage: &[f64],
    config: &GameConfig,
) -> Result<(), GameError> {
    let cap = config.capacity();
    let sc = allocate_shares(compute, cap.compute_total())?;
    let sm = allocate_shares(storage, cap.storage_total())?;
    for player in 0..compute.len() {
        trace.push(TrajectoryRow {
            round,
            player,
            compute: compute[player],
            storage: storage[player],
            share_compute: sc[player],
            share_storage: sm[player],
            utility: utility_unchecked(
                player,
                compute[player],
                storage[player],
                sum_except(compute, player),
                sum_except(storage, player),
                config,
            ),
        });
    }
    Ok(())
}
