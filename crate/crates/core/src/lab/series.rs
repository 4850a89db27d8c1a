use serde::{Deserialize, Serialize};

use super::{stats::ls_slope, LabError};
use crate::engine::level_means;
use crate::model::{classify, OffspringLaw, StepLaw, Verdict};

/// Exponent used to complete the series past the last computed term.
pub const TAIL_EXPONENT: f64 = -1.5;

/// `E Z = Σ_n E|ℒ_n|`, summed exactly up to `n_max` and completed by a power tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub n_max: usize,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Slope of `log term` against `log n` on the top decade `[n_max/10, n_max]`.
    pub fitted_exponent: Option<f64>,
    pub tail_constant: f64,
    pub tail_completion: f64,
    pub completion_uncertainty: f64,
    pub total: f64,
}

/// `Σ_{n > N} n^a ≈ (N + 1/2)^{a+1} / -(a+1)` for `a < -1`.
fn power_tail(n_max: usize, exponent: f64) -> f64 {
    if exponent >= -1.0 {
        return f64::INFINITY;
    }
    (n_max as f64 + 0.5).powf(exponent + 1.0) / -(exponent + 1.0)
}

/// Fitted exponent of the terms over `lo..=hi`, skipping nothing: any zero
/// term in the window gives `None`.
pub fn fit_exponent(terms: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let lo = lo.max(1);
    if hi >= terms.len() || lo >= hi {
        return None;
    }
    let mut points = Vec::with_capacity(hi - lo + 1);
    for (n, &t) in terms.iter().enumerate().take(hi + 1).skip(lo) {
        if t <= 0.0 {
            return None;
        }
        points.push(((n as f64).ln(), t.ln()));
    }
    ls_slope(&points)
}

pub fn ez_series(step: &StepLaw, offspring: &OffspringLaw, n_max: usize) -> Result<SeriesReport, LabError> {
    let report = classify(step, offspring)?;
    if report.verdict == Verdict::Supercritical {
        return Err(LabError::SupercriticalDivergence(report.gap()));
    }
    let terms = level_means(step, offspring, n_max)?;
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let fitted_exponent = fit_exponent(&terms, n_max / 10, n_max);

    // averaging the last two terms smooths the parity oscillation of
    // walks with period 2
    let constant = |a: f64| match n_max {
        0 => 0.0,
        1 => terms[1],
        _ => 0.5 * (terms[n_max] * (n_max as f64).powf(-a) + terms[n_max - 1] * ((n_max - 1) as f64).powf(-a)),
    };
    let tail_constant = constant(TAIL_EXPONENT);
    let (tail_completion, completion_uncertainty) = if tail_constant == 0.0 {
        (0.0, 0.0)
    } else {
        let tail = tail_constant * power_tail(n_max, TAIL_EXPONENT);
        let alt = fitted_exponent.map_or(tail, |a| constant(a) * power_tail(n_max, a));
        (tail, (tail - alt).abs())
    };
    let total = partial_sums.last().copied().unwrap_or(0.0) + tail_completion;
    Ok(SeriesReport {
        n_max,
        terms,
        partial_sums,
        fitted_exponent,
        tail_constant,
        tail_completion,
        completion_uncertainty,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_partial_sums() {
        let r = ez_series(&StepLaw::pemantle(), &OffspringLaw::constant(2), 10).unwrap();
        assert_eq!(r.partial_sums[0], 1.0);
        assert!((r.partial_sums[1] - 1.1339746).abs() < 1e-7);
        assert!((r.partial_sums[2] - 1.4019238).abs() < 1e-7);
        assert!(r.partial_sums.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_series() {
        let r = ez_series(&StepLaw::pemantle(), &OffspringLaw::constant(2), 0).unwrap();
        assert_eq!(r.total, 1.0);
        assert_eq!(r.tail_completion, 0.0);
    }

    #[test]
    fn subcritical_terms_decay_fast() {
        let step = StepLaw::plus_minus_one(0.05).unwrap();
        let r = ez_series(&step, &OffspringLaw::constant(2), 400).unwrap();
        assert!(r.fitted_exponent.unwrap() < -5.0);
        assert!(r.tail_completion < 1e-12);
    }

    #[test]
    fn supercritical_is_refused() {
        let step = StepLaw::plus_minus_one(0.2).unwrap();
        assert!(matches!(
            ez_series(&step, &OffspringLaw::constant(2), 10),
            Err(LabError::SupercriticalDivergence(_))
        ));
    }

    #[test]
    fn power_tail_matches_direct_sum() {
        let direct: f64 = (101..2_000_000).map(|n| (n as f64).powf(-1.5)).sum::<f64>()
            + power_tail(1_999_999, -1.5);
        assert!((power_tail(100, -1.5) - direct).abs() / direct < 1e-5);
    }
}
