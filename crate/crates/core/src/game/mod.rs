//! Non-cooperative VM resource allocation game of a roadside cloudlet.
//!
//! Each VM requests `c_i` compute and `m_i` storage and receives the
//! proportional share `c_i * C / sum(c)`. Its payoff is the weighted share
//! minus a linear price on what it requested.

mod nash;
mod vrc;

pub use nash::{solve_nash, solve_nash_traced, TrajectoryRow};
pub use vrc::{allocate_round, vrc_admit_and_update, RoundOutcome, VrcAdmission};

use serde::Serialize;

use crate::error::GameError;
use crate::model::GameConfig;

fn check_requests(
    field: &'static str,
    requests: &[f64],
    players: usize,
    limit: f64,
) -> Result<(), GameError> {
    if requests.len() != players {
        return Err(GameError::LengthMismatch {
            field,
            expected: players,
            actual: requests.len(),
        });
    }
    for (index, &value) in requests.iter().enumerate() {
        if !(value > 0.0 && value <= limit) {
            return Err(GameError::RequestOutOfRange {
                field,
                index,
                value,
                limit,
            });
        }
    }
    Ok(())
}

/// Sum of every entry except `skip`, accumulated in index order.
pub(crate) fn sum_except(values: &[f64], skip: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, v)| v)
        .sum()
}

/// Payoff of player `player_index` for the given request profile.
///
/// `alpha*c_i*C/(c_i+c_-i) + beta*m_i*M/(m_i+m_-i) - (lambda*c_i + gamma*m_i)`.
/// With a single player the fractions collapse to `C` and `M`.
pub fn utility(
    player_index: usize,
    requests_compute: &[f64],
    requests_storage: &[f64],
    config: &GameConfig,
) -> Result<f64, GameError> {
    let n = config.num_players();
    if player_index >= n {
        return Err(GameError::PlayerOutOfRange {
            index: player_index,
            players: n,
        });
    }
    let cap = config.capacity();
    check_requests("requests_compute", requests_compute, n, cap.compute_total())?;
    check_requests("requests_storage", requests_storage, n, cap.storage_total())?;
    Ok(utility_unchecked(
        player_index,
        requests_compute[player_index],
        requests_storage[player_index],
        sum_except(requests_compute, player_index),
        sum_except(requests_storage, player_index),
        config,
    ))
}

/// Payoff given the player's own requests and the sums over the others.
pub(crate) fn utility_unchecked(
    player_index: usize,
    own_compute: f64,
    own_storage: f64,
    others_compute: f64,
    others_storage: f64,
    config: &GameConfig,
) -> f64 {
    let p = &config.players()[player_index];
    let cap = config.capacity();
    let share_c = own_compute * cap.compute_total() / (own_compute + others_compute);
    let share_m = own_storage * cap.storage_total() / (own_storage + others_storage);
    p.alpha * share_c + p.beta * share_m - (p.price_compute * own_compute + p.price_storage * own_storage)
}

/// Maximizer of `weight * x * total / (x + others) - price * x` over
/// `[floor, total]`.
///
/// The unconstrained stationary point is
/// `sqrt(weight/price * others * total) - others`; the payoff is concave in
/// `x`, so clamping it into the interval
/// gives the constrained argmax. With `others == 0` the expression is zero
/// and the floor is returned.
pub(crate) fn best_response_component(weight: f64, price: f64, others: f64, total: f64, floor: f64) -> f64 {
    let raw = (weight / price * others * total).sqrt() - others;
    raw.min(total).max(floor)
}

/// Best response `(c*, m*)` of a player to the other players' total requests.
pub fn best_response(
    player_index: usize,
    others_compute_sum: f64,
    others_storage_sum: f64,
    config: &GameConfig,
) -> Result<(f64, f64), GameError> {
    let n = config.num_players();
    let p = config.players().get(player_index).ok_or(GameError::PlayerOutOfRange {
        index: player_index,
        players: n,
    })?;
    for (field, v) in [
        ("others_compute_sum", others_compute_sum),
        ("others_storage_sum", others_storage_sum),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(GameError::RequestOutOfRange {
                field,
                index: player_index,
                value: v,
                limit: f64::INFINITY,
            });
        }
    }
    let cap = config.capacity();
    let floor = config.request_floor();
    Ok((
        best_response_component(p.alpha, p.price_compute, others_compute_sum, cap.compute_total(), floor),
        best_response_component(p.beta, p.price_storage, others_storage_sum, cap.storage_total(), floor),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UniquenessViolation {
    /// Zero-based player index.
    pub player: usize,
    /// `alpha < 4(N-1) * price_compute`
    pub compute: bool,
    /// `beta < 4(N-1) * price_storage`
    pub storage: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniquenessReport {
    pub holds: bool,
    pub violations: Vec<UniquenessViolation>,
}

impl UniquenessReport {
    pub fn violating_players(&self) -> Vec<usize> {
        self.violations.iter().map(|v| v.player).collect()
    }
}

/// Sufficient condition for a unique equilibrium: every player has
/// `alpha >= 4(N-1) lambda` and `beta >= 4(N-1) gamma` (inclusive).
pub fn check_uniqueness(config: &GameConfig) -> UniquenessReport {
    let k = 4.0 * (config.num_players() as f64 - 1.0);
    let violations: Vec<_> = config
        .players()
        .iter()
        .enumerate()
        .filter_map(|(player, p)| {
            let compute = p.alpha < k * p.price_compute;
            let storage = p.beta < k * p.price_storage;
            (compute || storage).then_some(UniquenessViolation {
                player,
                compute,
                storage,
            })
        })
        .collect();
    UniquenessReport {
        holds: violations.is_empty(),
        violations,
    }
}

/// Split `total` in proportion to the requests.
pub fn allocate_shares(requests: &[f64], total: f64) -> Result<Vec<f64>, GameError> {
    if requests.is_empty() {
        return Err(GameError::EmptyRequests);
    }
    for (index, &value) in requests.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(GameError::RequestOutOfRange {
                field: "requests",
                index,
                value,
                limit: f64::INFINITY,
            });
        }
    }
    let sum: f64 = requests.iter().sum();
    Ok(requests.iter().map(|r| r * total / sum).collect())
}
