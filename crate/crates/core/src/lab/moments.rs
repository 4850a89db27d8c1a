use serde::{Deserialize, Serialize};

use super::{Experiment, LabError};

/// Direct Monte Carlo mean of `Z`, bracketed for censoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBracket {
    pub trials: u64,
    /// Mean with truncated trials counted at their recorded size.
    pub lower: f64,
    /// Equal to `lower` when nothing was truncated, infinite otherwise.
    pub upper: f64,
    pub standard_error: f64,
    pub truncated: u64,
    pub max_z: u64,
}

impl MeanBracket {
    /// Distance from `x` to the bracket, zero inside it.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lower {
            self.lower - x
        } else if x > self.upper {
            x - self.upper
        } else {
            0.0
        }
    }
}

pub fn z_mean(exp: &Experiment, trials: u64) -> Result<MeanBracket, LabError> {
    if trials < 2 {
        return Err(LabError::TooFewTrials { trials, min: 2 });
    }
    // integer sums keep the result exact and order-free
    let (mut s1, mut s2, mut truncated, mut max_z) = (0u128, 0u128, 0u64, 0u64);
    exp.for_each_trial(trials, |r| {
        s1 += r.z as u128;
        s2 += (r.z as u128) * (r.z as u128);
        truncated += r.truncated as u64;
        max_z = max_z.max(r.z);
    });
    let n = trials as f64;
    let mean = s1 as f64 / n;
    let var = (s2 as f64 - n * mean * mean) / (n - 1.0);
    Ok(MeanBracket {
        trials,
        lower: mean,
        upper: if truncated == 0 { mean } else { f64::INFINITY },
        standard_error: (var.max(0.0) / n).sqrt(),
        truncated,
        max_z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub trials: u64,
    /// Running mean of `Z log Z` over the first `trials` trials.
    pub mean: f64,
    pub truncated: u64,
}

/// Running means of `Z log Z` over one stream of trials, read at each
/// schedule point. Truncated trials contribute their recorded size, which
/// underestimates.
pub fn zlogz_trend(exp: &Experiment, schedule: &[u64]) -> Result<Vec<TrendRow>, LabError> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::BadSchedule(
            "schedule must be an increasing list of positive sizes".into(),
        ));
    }
    let last = *schedule.last().unwrap();
    let mut rows = Vec::with_capacity(schedule.len());
    let mut next = 0usize;
    let (mut sum, mut comp, mut truncated, mut seen) = (0.0f64, 0.0f64, 0u64, 0u64);
    exp.for_each_trial(last, |r| {
        let z = r.z as f64;
        let term = z * z.ln();
        let t = sum + term;
        comp += if sum.abs() >= term { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        truncated += r.truncated as u64;
        seen += 1;
        if seen == schedule[next] {
            rows.push(TrendRow {
                trials: seen,
                mean: (sum + comp) / seen as f64,
                truncated,
            });
            next += 1;
        }
    });
    Ok(rows)
}

/// Whether each running mean is strictly above the previous one.
pub fn strictly_increasing(rows: &[TrendRow]) -> bool {
    rows.windows(2).all(|w| w[1].mean > w[0].mean)
}
