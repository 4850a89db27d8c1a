use std::collections::BTreeSet;

use crate::model::StepLaw;

use super::PathError;

/// Default limit on the number of lattice states held in one DP layer.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Per-index bounds on a walk `S_0 = 0, S_1, ..., S_n`.
///
/// Index 0 and index `n` may carry bounds too; the standard constructors only
/// constrain the interior `0 < i < n` and leave the endpoint to the
/// [`TerminalCondition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarrierProfile {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

impl BarrierProfile {
    pub fn unconstrained(horizon: usize) -> Self {
        BarrierProfile {
            lower: vec![i64::MIN; horizon + 1],
            upper: vec![i64::MAX; horizon + 1],
        }
    }

    /// `S_i >= -m` for `0 < i < n`.
    pub fn one_sided(horizon: usize, m: i64) -> Self {
        Self::unconstrained(horizon).with_interior(Some(-m), None)
    }

    /// `-m <= S_i <= top` for `0 < i < n`.
    pub fn corridor(horizon: usize, m: i64, top: i64) -> Self {
        Self::unconstrained(horizon).with_interior(Some(-m), Some(top))
    }

    /// The corridor `-m <= S_i <= max(k, 0) + ⌊ε√n⌋` for an endpoint `k`.
    pub fn upper_corridor(horizon: usize, k: i64, m: i64, epsilon: f64) -> Self {
        let top = k.max(0) + (epsilon * (horizon as f64).sqrt()).floor() as i64;
        Self::corridor(horizon, m, top)
    }

    /// `S_i < k` for `0 < i < n`.
    pub fn strict_below(horizon: usize, k: i64) -> Self {
        Self::unconstrained(horizon).with_interior(None, Some(k - 1))
    }

    /// `0 <= S_i < k` for `0 < i < n`.
    pub fn below_target(horizon: usize, k: i64) -> Self {
        Self::unconstrained(horizon).with_interior(Some(0), Some(k - 1))
    }

    /// The `(k, n)`-useful walk: `0 <= S_i < k` on the interior and, for every
    /// `m >= m0`, `S_{n-m} < k - m^{1/7}`. On integers the envelope reads
    /// `S_{n-m} <= k - ⌊m^{1/7}⌋ - 1`; it applies down to `S_0` (`m = n`).
    pub fn useful(horizon: usize, k: i64, m0: usize) -> Self {
        let mut profile = Self::below_target(horizon, k);
        for m in m0.max(1)..=horizon {
            let index = horizon - m;
            let cap = k - integer_seventh_root(m as u64) as i64 - 1;
            profile.upper[index] = profile.upper[index].min(cap);
        }
        profile
    }

    pub fn with_interior(mut self, lower: Option<i64>, upper: Option<i64>) -> Self {
        let n = self.horizon();
        for i in 1..n {
            if let Some(l) = lower {
                self.lower[i] = self.lower[i].max(l);
            }
            if let Some(u) = upper {
                self.upper[i] = self.upper[i].min(u);
            }
        }
        self
    }

    /// Tightens the bounds at a single index.
    pub fn with_bounds(mut self, index: usize, lower: Option<i64>, upper: Option<i64>) -> Self {
        if let Some(l) = lower {
            self.lower[index] = self.lower[index].max(l);
        }
        if let Some(u) = upper {
            self.upper[index] = self.upper[index].min(u);
        }
        self
    }

    /// Pins `S_index = value`.
    pub fn with_pin(self, index: usize, value: i64) -> Self {
        self.with_bounds(index, Some(value), Some(value))
    }

    pub fn horizon(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn lower(&self, index: usize) -> Option<i64> {
        Some(self.lower[index]).filter(|&l| l != i64::MIN)
    }

    pub fn upper(&self, index: usize) -> Option<i64> {
        Some(self.upper[index]).filter(|&u| u != i64::MAX)
    }

    pub(crate) fn raw_bounds(&self, index: usize) -> (i64, i64) {
        (self.lower[index], self.upper[index])
    }

    pub fn admits(&self, index: usize, value: i64) -> bool {
        self.lower[index] <= value && value <= self.upper[index]
    }

    /// Whether some index has an empty bound interval.
    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l > u)
    }

    /// Bounds of the reflected walk `-S`.
    pub fn reflected(&self) -> Self {
        BarrierProfile {
            lower: self.upper.iter().map(|&u| neg_bound(u)).collect(),
            upper: self.lower.iter().map(|&l| neg_bound(l)).collect(),
        }
    }
}

fn neg_bound(b: i64) -> i64 {
    match b {
        i64::MIN => i64::MAX,
        i64::MAX => i64::MIN,
        b => -b,
    }
}

/// Largest `r` with `r^7 <= m`.
pub fn integer_seventh_root(m: u64) -> u64 {
    let mut r = (m as f64).powf(1.0 / 7.0).round() as u64;
    while r > 0 && r.saturating_pow(7) > m {
        r -= 1;
    }
    while (r + 1).checked_pow(7).is_some_and(|v| v <= m) {
        r += 1;
    }
    r
}

/// Constraint on the endpoint `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminalCondition {
    Equals(i64),
    AtLeast(i64),
    InSet(BTreeSet<i64>),
}

impl TerminalCondition {
    pub fn admits(&self, value: i64) -> bool {
        match self {
            TerminalCondition::Equals(k) => value == *k,
            TerminalCondition::AtLeast(k) => value >= *k,
            TerminalCondition::InSet(set) => set.contains(&value),
        }
    }

    pub(crate) fn range(&self) -> (i64, i64) {
        match self {
            TerminalCondition::Equals(k) => (*k, *k),
            TerminalCondition::AtLeast(k) => (*k, i64::MAX),
            TerminalCondition::InSet(set) => (
                set.first().copied().unwrap_or(0),
                set.last().copied().unwrap_or(-1),
            ),
        }
    }

    fn validate(&self) -> Result<(), PathError> {
        match self {
            TerminalCondition::InSet(set) if set.is_empty() => Err(PathError::EmptyTerminalSet),
            _ => Ok(()),
        }
    }

    pub fn reflected(&self) -> Option<TerminalCondition> {
        match self {
            TerminalCondition::Equals(k) => Some(TerminalCondition::Equals(-k)),
            TerminalCondition::InSet(set) => {
                Some(TerminalCondition::InSet(set.iter().map(|v| -v).collect()))
            }
            // -S_n >= -k is an upper bound, not expressible as at_least
            TerminalCondition::AtLeast(_) => None,
        }
    }
}

/// A step law, barrier profile, and terminal condition: one event about a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct PathQuery {
    pub step: StepLaw,
    pub profile: BarrierProfile,
    pub terminal: TerminalCondition,
    pub state_cap: usize,
}

impl PathQuery {
    pub fn new(step: StepLaw, profile: BarrierProfile, terminal: TerminalCondition) -> Self {
        PathQuery {
            step,
            profile,
            terminal,
            state_cap: DEFAULT_STATE_CAP,
        }
    }

    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn horizon(&self) -> usize {
        self.profile.horizon()
    }

    pub fn validate(&self) -> Result<(), PathError> {
        self.step.require_integer_lattice()?;
        self.terminal.validate()
    }

    /// The same event for `-S`: negated steps, swapped and negated bounds,
    /// negated terminal. `None` for `AtLeast` terminals.
    pub fn reflected(&self) -> Option<PathQuery> {
        let terminal = self.terminal.reflected()?;
        Some(PathQuery {
            step: self.step.negated(),
            profile: self.profile.reflected(),
            terminal,
            state_cap: self.state_cap,
        })
    }

    /// The walk read backwards from its endpoint, `R_i = S_{n-i} - S_n`, whose
    /// steps have the law of `-X`. Only defined for a pinned endpoint.
    pub fn time_reversed(&self) -> Option<PathQuery> {
        let TerminalCondition::Equals(k) = self.terminal else {
            return None;
        };
        let n = self.horizon();
        let mut profile = BarrierProfile::unconstrained(n);
        for i in 0..=n {
            let (l, u) = self.profile.raw_bounds(n - i);
            let shift = |b: i64| match b {
                i64::MIN | i64::MAX => b,
                b => b - k,
            };
            profile.lower[i] = shift(l);
            profile.upper[i] = shift(u);
        }
        Some(PathQuery {
            step: self.step.negated(),
            profile,
            terminal: TerminalCondition::Equals(-k),
            state_cap: self.state_cap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventh_roots() {
        assert_eq!(integer_seventh_root(0), 0);
        assert_eq!(integer_seventh_root(1), 1);
        assert_eq!(integer_seventh_root(127), 1);
        assert_eq!(integer_seventh_root(128), 2);
        assert_eq!(integer_seventh_root(2186), 2);
        assert_eq!(integer_seventh_root(2187), 3);
        assert_eq!(integer_seventh_root(u64::MAX), 565);
    }

    #[test]
    fn useful_profile_reproduces_envelope() {
        let (n, k, m0) = (400usize, 20i64, 64usize);
        let p = BarrierProfile::useful(n, k, m0);
        for i in 1..n {
            let m = n - i;
            let expected_upper = if m >= m0 {
                // largest integer strictly below k - m^{1/7}
                let bound = k as f64 - (m as f64).powf(1.0 / 7.0);
                (bound - 1e-9).ceil() as i64 - 1
            } else {
                k - 1
            };
            assert_eq!(p.upper(i), Some(expected_upper.min(k - 1)), "index {i}");
            assert_eq!(p.lower(i), Some(0));
        }
        // S_0 = 0 < k - n^{1/7}
        assert!(p.admits(0, 0));
        assert_eq!(p.upper(n), None);
    }

    #[test]
    fn constructors() {
        let p = BarrierProfile::one_sided(5, 2);
        assert_eq!(p.lower(0), None);
        assert_eq!(p.lower(1), Some(-2));
        assert_eq!(p.lower(4), Some(-2));
        assert_eq!(p.lower(5), None);
        let p = BarrierProfile::strict_below(4, 3);
        assert_eq!(p.upper(2), Some(2));
        let p = BarrierProfile::upper_corridor(400, 20, 0, 0.25);
        assert_eq!(p.upper(1), Some(25));
        let p = BarrierProfile::below_target(10, 5).with_pin(4, 2);
        assert!(p.admits(4, 2) && !p.admits(4, 3));
        assert!(!p.is_empty());
        assert!(BarrierProfile::below_target(10, 5).with_pin(4, 7).is_empty());
    }

    #[test]
    fn reflection_swaps_bounds() {
        let p = BarrierProfile::corridor(3, 1, 4).reflected();
        assert_eq!(p.lower(1), Some(-4));
        assert_eq!(p.upper(1), Some(1));
        assert_eq!(p.lower(0), None);
    }
}
