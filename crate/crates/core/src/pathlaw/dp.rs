use serde::Serialize;

use crate::model::{tilt, CriticalityReport, StepLaw};

use super::xfloat::{Accumulator, Probability};
use super::{BarrierProfile, PathError, PathQuery};

/// Terminal cells below this value would have been flushed by a plain `f64` DP.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathProbability {
    pub probability: Probability,
    /// Terminal states whose mass is below [`UNDERFLOW_THRESHOLD`].
    pub underflow_count: usize,
    pub peak_states: usize,
}

impl PathProbability {
    pub fn value(&self) -> f64 {
        self.probability.value()
    }
}

/// Forward DP over reachable lattice states, one layer per step.
///
/// The layer holds a contiguous window `[lo, lo + cells.len())` of positions;
/// bounds clip it and zero cells at either end are trimmed.
pub struct WalkDp<'a> {
    steps: Vec<(i64, f64)>,
    law: &'a StepLaw,
    lo: i64,
    cells: Vec<Probability>,
    scratch: Vec<Accumulator>,
    layer: usize,
    state_cap: usize,
    peak_states: usize,
}

impl<'a> WalkDp<'a> {
    pub fn new(law: &'a StepLaw, state_cap: usize) -> Self {
        WalkDp {
            steps: law.support().to_vec(),
            law,
            lo: 0,
            cells: vec![Probability::ONE],
            scratch: Vec::new(),
            layer: 0,
            state_cap,
            peak_states: 1,
        }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn peak_states(&self) -> usize {
        self.peak_states
    }

    pub fn is_dead(&self) -> bool {
        self.cells.is_empty()
    }

    /// Restricts the current layer to `[lower, upper]`.
    pub fn clip(&mut self, lower: i64, upper: i64) {
        if self.cells.is_empty() {
            return;
        }
        let hi = self.lo + self.cells.len() as i64 - 1;
        let new_lo = self.lo.max(lower);
        let new_hi = hi.min(upper);
        if new_lo > new_hi {
            self.cells.clear();
            return;
        }
        let start = (new_lo - self.lo) as usize;
        let end = (new_hi - self.lo) as usize + 1;
        self.cells.truncate(end);
        self.cells.drain(..start);
        self.lo = new_lo;
        self.trim();
    }

    /// Takes one step and keeps only positions in `[lower, upper]`.
    pub fn advance(&mut self, lower: i64, upper: i64) -> Result<(), PathError> {
        self.layer += 1;
        if self.cells.is_empty() {
            return Ok(());
        }
        let hi = self.lo + self.cells.len() as i64 - 1;
        let new_lo = (self.lo + self.law.min_step()).max(lower);
        let new_hi = (hi + self.law.max_step()).min(upper);
        if new_lo > new_hi {
            self.cells.clear();
            return Ok(());
        }
        let width = (new_hi - new_lo + 1) as usize;
        if width > self.state_cap {
            return Err(PathError::StateCapExceeded {
                states: width,
                cap: self.state_cap,
                layer: self.layer,
            });
        }
        self.peak_states = self.peak_states.max(width);
        self.scratch.clear();
        self.scratch.resize(width, Accumulator::default());
        for &(x, p) in &self.steps {
            // source index j lands on target lo + j + x
            let first = (new_lo - x - self.lo).max(0);
            let last = (new_hi - x - self.lo).min(self.cells.len() as i64 - 1);
            if first > last {
                continue;
            }
            let offset = self.lo + x - new_lo;
            for j in first..=last {
                let c = self.cells[j as usize];
                self.scratch[(j + offset) as usize].add(c.mantissa() * p, c.exponent());
            }
        }
        self.cells.clear();
        self.cells.extend(self.scratch.iter().map(|a| a.finish()));
        self.lo = new_lo;
        self.trim();
        Ok(())
    }

    fn trim(&mut self) {
        let Some(first) = self.cells.iter().position(|c| !c.is_zero()) else {
            self.cells.clear();
            return;
        };
        let last = self.cells.iter().rposition(|c| !c.is_zero()).unwrap();
        self.cells.truncate(last + 1);
        self.cells.drain(..first);
        self.lo += first as i64;
    }

    /// Total mass of the current layer.
    pub fn mass(&self) -> Probability {
        Probability::sum(self.cells.iter().copied())
    }

    /// `(position, mass)` pairs of the current layer.
    pub fn states(&self) -> impl Iterator<Item = (i64, Probability)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(j, &c)| (self.lo + j as i64, c))
    }
}

/// Runs the walk through every layer of `profile`, clipping the last layer to
/// the terminal's range as well.
fn run_profile<'a>(
    law: &'a StepLaw,
    profile: &BarrierProfile,
    terminal: (i64, i64),
    state_cap: usize,
) -> Result<WalkDp<'a>, PathError> {
    let mut dp = WalkDp::new(law, state_cap);
    let n = profile.horizon();
    let (l0, u0) = profile.raw_bounds(0);
    if n == 0 {
        dp.clip(l0.max(terminal.0), u0.min(terminal.1));
        return Ok(dp);
    }
    dp.clip(l0, u0);
    for i in 1..=n {
        let (mut l, mut u) = profile.raw_bounds(i);
        if i == n {
            l = l.max(terminal.0);
            u = u.min(terminal.1);
        }
        dp.advance(l, u)?;
        if dp.is_dead() {
            break;
        }
    }
    Ok(dp)
}

fn underflows(p: Probability) -> bool {
    !p.is_zero() && p.value() < UNDERFLOW_THRESHOLD
}

/// Probability that the walk satisfies every barrier and the terminal condition.
pub fn path_probability(q: &PathQuery) -> Result<PathProbability, PathError> {
    q.validate()?;
    let dp = run_profile(&q.step, &q.profile, q.terminal.range(), q.state_cap)?;
    let mut underflow_count = 0;
    let probability = Probability::sum(
        dp.states()
            .filter(|&(s, _)| q.terminal.admits(s))
            .inspect(|&(_, c)| underflow_count += underflows(c) as usize)
            .map(|(_, c)| c),
    );
    Ok(PathProbability {
        probability,
        underflow_count,
        peak_states: dp.peak_states(),
    })
}

/// The same probability computed under the `λ*`-tilted law:
/// `P(S ∈ B) = e^{-n f(λ*)} E[e^{-λ* S~_n} 1{S~ ∈ B}]`, where `S~` is the walk
/// of centered tilted steps.
pub fn tilted_path_probability(
    q: &PathQuery,
    report: &CriticalityReport,
) -> Result<PathProbability, PathError> {
    q.validate()?;
    let lambda = report.lambda_star;
    let tilted = tilt(&q.step, lambda)?;
    let dp = run_profile(tilted.law(), &q.profile, q.terminal.range(), q.state_cap)?;
    let n = q.horizon() as f64;
    let centering = n * tilted.offset();
    let mut underflow_count = 0;
    let weighted = Probability::sum(
        dp.states()
            .filter(|&(s, _)| q.terminal.admits(s))
            .map(|(s, c)| c.mul(Probability::from_ln(-lambda * (s as f64 - centering))))
            .inspect(|&c| underflow_count += underflows(c) as usize),
    );
    let probability = weighted.mul(Probability::from_ln(-n * report.f_star));
    Ok(PathProbability {
        probability,
        underflow_count,
        peak_states: dp.peak_states(),
    })
}

/// `P(S_i >= 0 for all 0 <= i <= n)` for `n = 0..=horizon`.
pub fn stay_nonnegative_masses(
    law: &StepLaw,
    horizon: usize,
    state_cap: usize,
) -> Result<Vec<Probability>, PathError> {
    law.require_integer_lattice()?;
    let mut dp = WalkDp::new(law, state_cap);
    let mut masses = Vec::with_capacity(horizon + 1);
    masses.push(Probability::ONE);
    for _ in 0..horizon {
        dp.advance(0, i64::MAX)?;
        masses.push(dp.mass());
    }
    Ok(masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify, OffspringLaw};
    use crate::pathlaw::TerminalCondition;

    fn pemantle_p() -> f64 {
        (2.0 - 3f64.sqrt()) / 4.0
    }

    #[test]
    fn two_step_excursion() {
        let q = PathQuery::new(
            StepLaw::pemantle(),
            BarrierProfile::one_sided(2, 0),
            TerminalCondition::Equals(0),
        );
        let r = path_probability(&q).unwrap();
        assert!((r.value() - 0.0625).abs() < 1e-15);
        let p = pemantle_p();
        assert!((r.value() - p * (1.0 - p)).abs() < 1e-16);
    }

    #[test]
    fn empty_walk() {
        let law: StepLaw = "-3:0.3,6:0.7".parse().unwrap();
        let q = PathQuery::new(
            "-1:0.5,1:0.5".parse().unwrap(),
            BarrierProfile::unconstrained(0),
            TerminalCondition::Equals(0),
        );
        assert_eq!(path_probability(&q).unwrap().value(), 1.0);
        let q = PathQuery::new(
            "-1:0.5,1:0.5".parse().unwrap(),
            BarrierProfile::unconstrained(0),
            TerminalCondition::AtLeast(1),
        );
        assert_eq!(path_probability(&q).unwrap().value(), 0.0);
        // a law on 3Z is refused
        let q = PathQuery::new(law, BarrierProfile::unconstrained(1), TerminalCondition::AtLeast(0));
        assert!(matches!(path_probability(&q), Err(PathError::Model(_))));
    }

    #[test]
    fn three_step_ballot() {
        let q = PathQuery::new(
            StepLaw::pemantle(),
            BarrierProfile::one_sided(3, 0),
            TerminalCondition::Equals(1),
        );
        let p = pemantle_p();
        let r = path_probability(&q).unwrap().value();
        assert!((r - 2.0 * p * p * (1.0 - p)).abs() < 1e-16);
        assert!((r - 0.0083735).abs() < 1e-7);
    }

    #[test]
    fn tilted_matches_direct_small() {
        let law = StepLaw::pemantle();
        let report = classify(&law, &OffspringLaw::constant(2)).unwrap();
        let q = PathQuery::new(
            law,
            BarrierProfile::one_sided(2, 0),
            TerminalCondition::Equals(0),
        );
        let t = tilted_path_probability(&q, &report).unwrap();
        assert!((t.value() - 0.0625).abs() < 1e-15);
        let q0 = PathQuery::new(
            StepLaw::pemantle(),
            BarrierProfile::unconstrained(0),
            TerminalCondition::Equals(0),
        );
        assert!((tilted_path_probability(&q0, &report).unwrap().value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deep_probabilities_keep_precision() {
        // unconstrained walk with terminal far beyond its drift: ~2^-2000
        let law = StepLaw::pemantle();
        let report = classify(&law, &OffspringLaw::constant(2)).unwrap();
        let q = PathQuery::new(
            law,
            BarrierProfile::unconstrained(2000),
            TerminalCondition::Equals(0),
        );
        let direct = path_probability(&q).unwrap();
        let tilted = tilted_path_probability(&q, &report).unwrap();
        assert_eq!(direct.value(), 0.0);
        assert_eq!(direct.underflow_count, 1);
        // P(S_2000 = 0) = C(2000,1000) (p(1-p))^1000 = C(2000,1000) 16^-1000
        let ln_binom: f64 = (1..=1000).map(|i| ((1000 + i) as f64 / i as f64).ln()).sum();
        let expected = ln_binom - 1000.0 * 16f64.ln();
        assert!((direct.probability.ln() - expected).abs() < 1e-9);
        assert!(direct.probability.relative_difference(tilted.probability) < 1e-10);
    }

    #[test]
    fn state_cap_is_enforced() {
        let q = PathQuery::new(
            "-1:0.5,1:0.5".parse().unwrap(),
            BarrierProfile::unconstrained(100),
            TerminalCondition::AtLeast(0),
        )
        .with_state_cap(50);
        assert!(matches!(
            path_probability(&q),
            Err(PathError::StateCapExceeded { .. })
        ));
    }

    #[test]
    fn stay_nonnegative_sequence() {
        let p = pemantle_p();
        let masses = stay_nonnegative_masses(&StepLaw::pemantle(), 3, 1000).unwrap();
        assert_eq!(masses[0].value(), 1.0);
        assert!((masses[1].value() - p).abs() < 1e-16);
        assert!((masses[2].value() - p).abs() < 1e-16);
        assert!((masses[3].value() - (p * p * (1.0 - p) + p * p * p + p * (1.0 - p) * p)).abs() < 1e-16);
    }
}
