use super::{local_admissible, migrated_admissible, RateModel, StateIndex};

/// Sparse CTMC generator: off-diagonal rates per row plus the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
}

impl Generator {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Off-diagonal `(column, rate)` entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        self.rows[i]
            .binary_search_by_key(&j, |&(col, _)| col)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonal
            .iter()
            .map(|d| d.abs())
            .chain(self.rows.iter().flatten().map(|&(_, r)| r.abs()))
            .fold(0.0, f64::max)
    }

    /// `pi Q` as a dense vector.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = pi.iter().zip(&self.diagonal).map(|(p, d)| p * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            if pi[i] == 0.0 {
                continue;
            }
            for &(j, r) in row {
                out[j] += pi[i] * r;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.rate(i, j)).collect())
            .collect()
    }
}

/// Generator of the occupancy chain over the enumerated states.
///
/// Arrivals that cannot be admitted produce no transition; they show up as
/// blocking (local) or dropping (migrated) instead.
pub fn build_generator(model: &RateModel, states: &StateIndex) -> Generator {
    let classes = model.classes();
    let capacity = model.capacity();
    let mut rows = Vec::with_capacity(states.len());
    let mut diagonal = Vec::with_capacity(states.len());

    for s in states.states() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut push = |target: &crate::model::OccupancyState, rate: f64| {
            if rate > 0.0 {
                let j = states.get(target).expect("admissible target is enumerated");
                row.push((j, rate));
            }
        };
        for (k, spec) in classes.iter().enumerate() {
            if local_admissible(s, k, classes, capacity) {
                let mut t = s.clone();
                t.local_counts[k] += 1;
                push(&t, spec.local_arrival_rate);
            }
            if migrated_admissible(s, k, classes, capacity) {
                let mut t = s.clone();
                t.migrated_counts[k] += 1;
                push(&t, spec.migrated_arrival_rate);
            }
            if s.local_counts[k] > 0 {
                let mut t = s.clone();
                t.local_counts[k] -= 1;
                push(&t, f64::from(s.local_counts[k]) * spec.local_departure_rate);
            }
            if s.migrated_counts[k] > 0 {
                let mut t = s.clone();
                t.migrated_counts[k] -= 1;
                push(&t, f64::from(s.migrated_counts[k]) * spec.migrated_departure_rate);
            }
        }
        row.sort_by_key(|&(j, _)| j);
        let out: f64 = row.iter().map(|&(_, r)| r).sum();
        diagonal.push(-out);
        rows.push(row);
    }

    Generator { rows, diagonal }
}
