use serde::{Deserialize, Serialize};

use super::stats::{binomial_se, wilson, Z95};
use super::{Experiment, LabError};
use crate::engine::TrialRecord;

/// Smallest trial count the tail estimators accept.
pub const MIN_TAIL_TRIALS: u64 = 10_000;
/// Expected hits required at the deepest `k` of a maximum tail.
pub const POWER_HITS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailTarget {
    /// `P(Z > n)`, compensated by `n log² n`.
    Z,
    /// `P(M >= k)`, compensated by `e^{λ* k}`; also `P(M = k)`, compensated by `k e^{λ* k}`.
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub threshold: u64,
    pub hits: u64,
    pub estimate: f64,
    pub standard_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Trials whose truncation leaves the event undetermined.
    pub censored_fraction: f64,
    pub compensator: f64,
    pub point_hits: Option<u64>,
    pub point_estimate: Option<f64>,
    pub point_wilson_low: Option<f64>,
    pub point_compensator: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub target: TailTarget,
    pub trials: u64,
    pub rows: Vec<TailRow>,
}

impl TailTable {
    /// Soft check: each estimate is at most the previous one plus `sigmas`
    /// combined standard errors.
    pub fn monotone_within(&self, sigmas: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = w[0].standard_error.hypot(w[1].standard_error);
            w[1].estimate <= w[0].estimate + sigmas * se
        })
    }

    /// Least-squares slope of `log estimate` against `log threshold` over
    /// rows with thresholds in `[lo, hi]` and a positive estimate.
    pub fn log_slope(&self, lo: u64, hi: u64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.threshold >= lo && r.threshold <= hi && r.threshold > 0 && r.estimate > 0.0)
            .map(|r| ((r.threshold as f64).ln(), r.estimate.ln()))
            .collect();
        super::stats::ls_slope(&pts)
    }
}

fn check_increasing(thresholds: &[u64]) -> Result<(), LabError> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::BadSchedule(
            "thresholds must be a non-empty increasing list".into(),
        ));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<(), LabError> {
    if trials < MIN_TAIL_TRIALS {
        return Err(LabError::TooFewTrials {
            trials,
            min: MIN_TAIL_TRIALS,
        });
    }
    Ok(())
}

fn row(threshold: u64, hits: u64, censored: u64, trials: u64, compensator: f64) -> TailRow {
    let estimate = hits as f64 / trials as f64;
    let (wilson_low, wilson_high) = wilson(hits, trials, Z95);
    TailRow {
        threshold,
        hits,
        estimate,
        standard_error: binomial_se(hits, trials),
        wilson_low,
        wilson_high,
        censored_fraction: censored as f64 / trials as f64,
        compensator: compensator * estimate,
        point_hits: None,
        point_estimate: None,
        point_wilson_low: None,
        point_compensator: None,
    }
}

/// `n log² n`, zero for `n <= 1`.
pub fn z_compensator(n: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let l = (n as f64).ln();
    n as f64 * l * l
}

/// Exceedance counts of `Z > n` from a stream of records.
#[derive(Debug, Clone)]
pub struct ZCounter {
    thresholds: Vec<u64>,
    hits: Vec<u64>,
    censored: Vec<u64>,
    trials: u64,
}

impl ZCounter {
    pub fn new(thresholds: &[u64]) -> Self {
        ZCounter {
            thresholds: thresholds.to_vec(),
            hits: vec![0; thresholds.len()],
            censored: vec![0; thresholds.len()],
            trials: 0,
        }
    }

    pub fn record(&mut self, r: &TrialRecord) {
        self.trials += 1;
        for (i, &t) in self.thresholds.iter().enumerate() {
            // a truncated trial has Z > z
            if r.z > t || (r.truncated && r.z >= t) {
                self.hits[i] += 1;
            } else if r.truncated {
                self.censored[i] += 1;
            }
        }
    }

    pub fn table(&self) -> TailTable {
        let trials = self.trials.max(1);
        TailTable {
            target: TailTarget::Z,
            trials: self.trials,
            rows: self
                .thresholds
                .iter()
                .enumerate()
                .map(|(i, &t)| row(t, self.hits[i], self.censored[i], trials, z_compensator(t)))
                .collect(),
        }
    }
}

/// Empirical survival `P(Z > n)` at each threshold.
pub fn z_tail(exp: &Experiment, trials: u64, thresholds: &[u64]) -> Result<TailTable, LabError> {
    check_increasing(thresholds)?;
    check_trials(trials)?;
    let max_nodes = exp.simulator.limits().max_nodes;
    if let Some(&t) = thresholds.iter().find(|&&t| t > max_nodes) {
        return Err(LabError::ThresholdBeyondCensoring {
            threshold: t,
            max_nodes,
        });
    }
    let mut counter = ZCounter::new(thresholds);
    exp.for_each_trial(trials, |r| counter.record(&r));
    Ok(counter.table())
}

/// Counts of `M >= k` and `M = k` for `k = 0..=k_max`.
#[derive(Debug, Clone)]
pub struct MCounter {
    at_least: Vec<u64>,
    exactly: Vec<u64>,
    censored: Vec<u64>,
    trials: u64,
}

impl MCounter {
    pub fn new(k_max: u64) -> Self {
        let len = k_max as usize + 1;
        MCounter {
            at_least: vec![0; len],
            exactly: vec![0; len],
            censored: vec![0; len],
            trials: 0,
        }
    }

    pub fn record(&mut self, r: &TrialRecord) {
        self.trials += 1;
        let m = r.m_living.max(0) as usize;
        let top = self.at_least.len() - 1;
        for k in 0..=m.min(top) {
            self.at_least[k] += 1;
        }
        if r.truncated {
            // M >= m is known; larger k are undetermined
            for k in (m + 1).min(top + 1)..=top {
                self.censored[k] += 1;
            }
        } else if m <= top {
            self.exactly[m] += 1;
        }
    }

    pub fn table(&self, lambda_star: f64) -> TailTable {
        let trials = self.trials.max(1);
        let rows = (0..self.at_least.len())
            .map(|k| {
                let scale = (lambda_star * k as f64).exp();
                let mut r = row(k as u64, self.at_least[k], self.censored[k], trials, scale);
                let point = self.exactly[k] as f64 / trials as f64;
                r.point_hits = Some(self.exactly[k]);
                r.point_estimate = Some(point);
                r.point_wilson_low = Some(wilson(self.exactly[k], trials, Z95).0);
                r.point_compensator = Some(k as f64 * scale * point);
                r
            })
            .collect();
        TailTable {
            target: TailTarget::M,
            trials: self.trials,
            rows,
        }
    }
}

/// Tail of the killed maximum `M` for `k = 0..=k_max`.
pub fn m_tail(exp: &Experiment, trials: u64, k_max: u64) -> Result<TailTable, LabError> {
    check_trials(trials)?;
    let lambda = exp
        .simulator
        .lambda_star()
        .ok_or_else(|| LabError::NotWellControlled("the maximum tail needs λ*".into()))?;
    let reachable = (-lambda * k_max as f64).exp();
    let required = POWER_HITS / trials as f64;
    if reachable < required {
        return Err(LabError::Power {
            k_max,
            reachable,
            required,
        });
    }
    let mut counter = MCounter::new(k_max);
    exp.for_each_trial(trials, |r| counter.record(&r));
    Ok(counter.table(lambda))
}
