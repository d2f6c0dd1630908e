//! Virtual resource counters.
//!
//! Every VM carries one cumulative counter per resource type. A VM whose
//! counter has reached the cap may not apply for that resource. Once every
//! VM has reached the cap for a resource, all counters of that resource are
//! cleared and a new fairness window starts.

use super::solve_nash;
use crate::error::GameError;
use crate::model::{GameConfig, VrcState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VrcAdmission {
    pub compute: bool,
    pub storage: bool,
}

fn reset_if_exhausted(counters: &mut [f64], cap: f64) {
    if counters.iter().all(|&c| c >= cap) {
        counters.iter_mut().for_each(|c| *c = 0.0);
    }
}

fn admit(counters: &mut [f64], cap: f64, player: usize, grant: f64) -> bool {
    reset_if_exhausted(counters, cap);
    let admitted = counters[player] < cap;
    if admitted {
        counters[player] += grant;
    }
    admitted
}

/// Check a player's counters against the caps and charge the grant on
/// admission. Returns the admission per resource type and the new state.
pub fn vrc_admit_and_update(
    state: &VrcState,
    player_index: usize,
    granted_compute: f64,
    granted_storage: f64,
) -> Result<(VrcAdmission, VrcState), GameError> {
    if player_index >= state.num_players() {
        return Err(GameError::PlayerOutOfRange {
            index: player_index,
            players: state.num_players(),
        });
    }
    for g in [granted_compute, granted_storage] {
        if !(g >= 0.0) {
            return Err(GameError::NegativeGrant(g));
        }
    }
    let mut next = state.clone();
    let admission = VrcAdmission {
        compute: admit(&mut next.applied_compute, next.cap_compute, player_index, granted_compute),
        storage: admit(&mut next.applied_storage, next.cap_storage, player_index, granted_storage),
    };
    Ok((admission, next))
}

/// Result of one allocation round under VRC fairness.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub grants_compute: Vec<f64>,
    pub grants_storage: Vec<f64>,
    pub admitted: Vec<VrcAdmission>,
    /// Both sub-games reached equilibrium (trivially true for empty ones).
    pub converged: bool,
}

/// One allocation round: VMs still eligible for a resource play the game for
/// that resource, the equilibrium shares are granted and charged to the
/// counters.
///
/// Compute and storage payoffs are separable, so each resource is solved as
/// its own sub-game among its eligible players.
pub fn allocate_round(config: &GameConfig, state: &VrcState) -> Result<(RoundOutcome, VrcState), GameError> {
    let n = config.num_players();
    if state.num_players() != n {
        return Err(GameError::LengthMismatch {
            field: "vrc",
            expected: n,
            actual: state.num_players(),
        });
    }
    let mut state = state.clone();
    reset_if_exhausted(&mut state.applied_compute, state.cap_compute);
    reset_if_exhausted(&mut state.applied_storage, state.cap_storage);

    let cap = config.capacity();
    let eligible_c: Vec<usize> = (0..n).filter(|&i| state.compute_eligible(i)).collect();
    let eligible_m: Vec<usize> = (0..n).filter(|&i| state.storage_eligible(i)).collect();

    let mut grants_compute = vec![0.0; n];
    let mut grants_storage = vec![0.0; n];
    let mut converged = true;

    if !eligible_c.is_empty() {
        let sub = config.subgame(&eligible_c)?;
        let k = eligible_c.len() as f64;
        let init_c = vec![cap.compute_total() / k; eligible_c.len()];
        let init_m = vec![cap.storage_total() / k; eligible_c.len()];
        let prof = solve_nash(&sub, &init_c, &init_m)?;
        converged &= prof.converged;
        for (j, &i) in eligible_c.iter().enumerate() {
            grants_compute[i] = prof.shares_compute[j];
        }
    }
    if !eligible_m.is_empty() {
        let sub = config.subgame(&eligible_m)?;
        let k = eligible_m.len() as f64;
        let init_c = vec![cap.compute_total() / k; eligible_m.len()];
        let init_m = vec![cap.storage_total() / k; eligible_m.len()];
        let prof = solve_nash(&sub, &init_c, &init_m)?;
        converged &= prof.converged;
        for (j, &i) in eligible_m.iter().enumerate() {
            grants_storage[i] = prof.shares_storage[j];
        }
    }

    // Eligibility was fixed after the round-start reset; charging must not
    // trigger a second reset part-way through the round.
    let admitted: Vec<VrcAdmission> = (0..n)
        .map(|i| VrcAdmission {
            compute: state.compute_eligible(i),
            storage: state.storage_eligible(i),
        })
        .collect();
    for i in 0..n {
        state.applied_compute[i] += grants_compute[i];
        state.applied_storage[i] += grants_storage[i];
    }

    Ok((
        RoundOutcome {
            grants_compute,
            grants_storage,
            admitted,
            converged,
        },
        state,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, VmGameParams};

    #[test]
    fn admits_below_cap() {
        let s = VrcState::new(2, 100.0, 100.0).unwrap();
        let (adm, s) = vrc_admit_and_update(&s, 0, 30.0, 0.0).unwrap();
        assert!(adm.compute && adm.storage);
        assert_eq!(s.applied_compute(), &[30.0, 0.0]);
    }

    #[test]
    fn refuses_at_cap() {
        let mut s = VrcState::new(2, 100.0, 100.0).unwrap();
        s.applied_compute = vec![100.0, 50.0];
        let (adm, next) = vrc_admit_and_update(&s, 0, 10.0, 0.0).unwrap();
        assert!(!adm.compute);
        assert!(adm.storage);
        assert_eq!(next.applied_compute(), &[100.0, 50.0]);
    }

    #[test]
    fn collective_reset_when_all_capped() {
        let mut s = VrcState::new(2, 100.0, 100.0).unwrap();
        s.applied_compute = vec![100.0, 120.0];
        let (adm, next) = vrc_admit_and_update(&s, 1, 7.0, 0.0).unwrap();
        assert!(adm.compute);
        assert_eq!(next.applied_compute(), &[0.0, 7.0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = VrcState::new(2, 100.0, 100.0).unwrap();
        assert!(vrc_admit_and_update(&s, 2, 1.0, 1.0).is_err());
        assert!(vrc_admit_and_update(&s, 0, -1.0, 1.0).is_err());
    }

    #[test]
    fn counters_never_decrease_within_window() {
        let cap = Capacity::unreserved(50.0, 100.0).unwrap();
        let players = vec![
            VmGameParams::new(4.0, 1.0, 1.0, 1.0).unwrap(),
            VmGameParams::new(1.0, 3.0, 1.0, 1.0).unwrap(),
            VmGameParams::new(2.0, 2.0, 1.0, 1.0).unwrap(),
        ];
        let cfg = GameConfig::new(cap, players).unwrap();
        let mut state = VrcState::new(3, 500.0, 1000.0).unwrap();
        for _ in 0..200 {
            let before = state.clone();
            let (_, next) = allocate_round(&cfg, &state).unwrap();
            let reset = next.applied_compute().iter().zip(before.applied_compute()).any(|(a, b)| a < b);
            if !reset {
                assert!(next.applied_compute().iter().all(|&x| x >= 0.0));
            } else {
                // Only a collective reset may lower a counter.
                assert!(before.applied_compute().iter().all(|&x| x >= 500.0));
            }
            state = next;
        }
    }

    #[test]
    fn long_run_grants_equalize() {
        let cap = Capacity::unreserved(50.0, 100.0).unwrap();
        let players = vec![
            VmGameParams::new(4.0, 1.0, 1.0, 1.0).unwrap(),
            VmGameParams::new(1.0, 3.0, 1.0, 1.0).unwrap(),
            VmGameParams::new(2.0, 2.0, 1.0, 1.0).unwrap(),
        ];
        let cfg = GameConfig::new(cap, players).unwrap();

        // Without counters the equilibrium favors player 0 for compute.
        let prof = solve_nash(&cfg, &[10.0, 5.0, 5.0], &[5.0, 15.0, 10.0]).unwrap();
        assert!(prof.shares_compute[0] > 1.5 * prof.shares_compute[1]);

        let mut state = VrcState::with_default_caps(3, &cap);
        let mut total_c = [0.0; 3];
        let mut total_m = [0.0; 3];
        for _ in 0..3000 {
            let (out, next) = allocate_round(&cfg, &state).unwrap();
            for i in 0..3 {
                total_c[i] += out.grants_compute[i];
                total_m[i] += out.grants_storage[i];
            }
            state = next;
        }
        let ratio = |t: &[f64; 3]| {
            let max = t.iter().cloned().fold(f64::MIN, f64::max);
            let min = t.iter().cloned().fold(f64::MAX, f64::min);
            max / min
        };
        assert!(ratio(&total_c) < 1.05, "compute totals {total_c:?}");
        assert!(ratio(&total_m) < 1.05, "storage totals {total_m:?}");
    }
}
