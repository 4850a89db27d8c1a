use crate::model::{OffspringLaw, StepLaw};
use crate::pathlaw::{stay_nonnegative_masses, PathError, DEFAULT_STATE_CAP};

/// `E|ℒ_n| = (E B)^n · P(S_i >= 0 for all i <= n)`.
pub fn level_mean_exact(step: &StepLaw, offspring: &OffspringLaw, n: usize) -> Result<f64, PathError> {
    Ok(*level_means(step, offspring, n)?.last().expect("n + 1 terms"))
}

/// `E|ℒ_n|` for `n = 0..=horizon`, from one DP pass.
pub fn level_means(
    step: &StepLaw,
    offspring: &OffspringLaw,
    horizon: usize,
) -> Result<Vec<f64>, PathError> {
    let log_mean = offspring.log_mean();
    let masses = stay_nonnegative_masses(step, horizon, DEFAULT_STATE_CAP)?;
    Ok(masses
        .iter()
        .enumerate()
        .map(|(n, m)| {
            if m.is_zero() {
                0.0
            } else {
                (m.ln() + n as f64 * log_mean).exp()
            }
        })
        .collect())
}
