use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Experiment;

/// Trials sharing one `(M, first generation at M, isolated)` classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileCell {
    pub m: i64,
    pub generation: u64,
    pub isolated: bool,
    pub count: u64,
}

/// For trials with `M = k`: how many first reach `k` at a generation in
/// `[k²/4, 4k²]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub k: i64,
    pub trials_at_k: u64,
    pub in_window: u64,
    pub in_window_isolated: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxProfile {
    pub trials: u64,
    /// Trials whose truncation leaves the classification unreliable; excluded.
    pub truncated: u64,
    pub cells: Vec<ProfileCell>,
    pub window: Vec<WindowRow>,
}

impl MaxProfile {
    /// Fraction of classified trials with `M = k`.
    pub fn mass_at(&self, k: i64) -> f64 {
        let n = self.trials - self.truncated;
        let c: u64 = self.cells.iter().filter(|c| c.m == k).map(|c| c.count).sum();
        if n == 0 {
            0.0
        } else {
            c as f64 / n as f64
        }
    }
}

/// Whether generation `n` lies in `[k²/4, 4k²]`.
pub fn in_window(k: i64, n: u64) -> bool {
    let k2 = (k * k) as u64;
    4 * n >= k2 && n <= 4 * k2
}

pub fn max_profile(exp: &Experiment, trials: u64) -> MaxProfile {
    let mut cells: BTreeMap<(i64, u64, bool), u64> = BTreeMap::new();
    let mut truncated = 0u64;
    exp.for_each_trial(trials, |r| {
        if r.truncated {
            truncated += 1;
        } else {
            *cells.entry((r.m_living, r.max_generation as u64, r.max_isolated)).or_default() += 1;
        }
    });
    let mut window: BTreeMap<i64, WindowRow> = BTreeMap::new();
    for (&(m, generation, isolated), &count) in &cells {
        if m < 1 {
            continue;
        }
        let row = window.entry(m).or_insert(WindowRow {
            k: m,
            trials_at_k: 0,
            in_window: 0,
            in_window_isolated: 0,
            fraction: 0.0,
        });
        row.trials_at_k += count;
        if in_window(m, generation) {
            row.in_window += count;
            if isolated {
                row.in_window_isolated += count;
            }
        }
    }
    let window = window
        .into_values()
        .map(|mut w| {
            w.fraction = w.in_window as f64 / w.trials_at_k as f64;
            w
        })
        .collect();
    MaxProfile {
        trials,
        truncated,
        cells: cells
            .into_iter()
            .map(|((m, generation, isolated), count)| ProfileCell {
                m,
                generation,
                isolated,
                count,
            })
            .collect(),
        window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_edges() {
        assert!(in_window(2, 1) && in_window(2, 16));
        assert!(!in_window(2, 0) && !in_window(2, 17));
        assert!(!in_window(3, 2) && in_window(3, 3));
    }
}
