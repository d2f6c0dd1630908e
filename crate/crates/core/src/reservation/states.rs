use std::collections::HashMap;

use super::RateModel;
use crate::error::ReservationError;
use crate::model::OccupancyState;

/// Feasible states in lexicographic order of `(n_l, n_g)` with a reverse
/// lookup table.
#[derive(Debug, Clone)]
pub struct StateIndex {
    states: Vec<OccupancyState>,
    index: HashMap<OccupancyState, usize>,
}

impl StateIndex {
    pub fn states(&self) -> &[OccupancyState] {
        &self.states
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn get(&self, state: &OccupancyState) -> Option<usize> {
        self.index.get(state).copied()
    }
    pub fn into_states(self) -> Vec<OccupancyState> {
        self.states
    }
}

/// Every occupancy state with local VMs inside the common resources and all
/// VMs inside the site totals.
pub fn enumerate_states(model: &RateModel) -> Result<StateIndex, ReservationError> {
    let k = model.num_classes();
    let mut coords = vec![0u32; 2 * k];
    let mut states = Vec::new();
    descend(model, &mut coords, 0, &mut states)?;
    if cfg!(debug_assertions) {
        for s in &states {
            debug_assert!(s.is_feasible(model.classes(), model.capacity()));
        }
    }
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(StateIndex { states, index })
}

fn to_state(coords: &[u32]) -> OccupancyState {
    let k = coords.len() / 2;
    OccupancyState {
        local_counts: coords[..k].to_vec(),
        migrated_counts: coords[k..].to_vec(),
    }
}

fn descend(
    model: &RateModel,
    coords: &mut [u32],
    pos: usize,
    out: &mut Vec<OccupancyState>,
) -> Result<(), ReservationError> {
    if pos == coords.len() {
        if out.len() >= model.state_cap() {
            return Err(ReservationError::StateSpaceOverflow {
                cap: model.state_cap(),
                partial: out.len(),
            });
        }
        out.push(to_state(coords));
        return Ok(());
    }
    // Every class has a positive footprint, so usage grows with each count:
    // stop at the first infeasible value. Deeper coordinates are back at
    // zero whenever the recursive call returns.
    coords[pos] = 0;
    loop {
        descend(model, coords, pos + 1, out)?;
        coords[pos] += 1;
        if !to_state(coords).is_feasible(model.classes(), model.capacity()) {
            break;
        }
    }
    coords[pos] = 0;
    Ok(())
}
