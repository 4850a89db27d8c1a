use std::f64::consts::PI;

use crate::model::{cumulant, CriticalityReport, StepLaw};

use super::PathError;

/// Default `C` in the admissible range `|a| <= C√n` of [`bahadur_rao_scale`].
pub const DEFAULT_LOCAL_RANGE: f64 = 3.0;
/// Default `c` in the admissible ranges of [`ballot_asymptotic`].
pub const DEFAULT_BALLOT_RANGE: f64 = 2.0;

/// `e^{-n f(λ) - aλ}`, an upper bound on `P(S_n >= Λ'(λ) n + a)` for `λ > 0`.
pub fn chernoff_bound(law: &StepLaw, lambda: f64, n: usize, a: f64) -> Result<f64, PathError> {
    if !(lambda > 0.0) {
        return Err(PathError::Range(format!("lambda {lambda} must be positive")));
    }
    let c = cumulant(law, lambda)?;
    let f = lambda * c.slope - c.value;
    Ok((-(n as f64) * f - a * lambda).exp())
}

/// [`chernoff_bound`] at `λ*`, where `Λ'(λ*) = 0`.
pub fn chernoff_bound_at_star(report: &CriticalityReport, n: usize, a: f64) -> f64 {
    (-(n as f64) * report.f_star - a * report.lambda_star).exp()
}

/// The local large-deviation scale `e^{-aλ* - n f(λ*)} / sqrt(2π n Λ''(λ*))`
/// for `P(S_n = a)`, defined for `1 <= n` and `|a| <= range √n`.
pub fn bahadur_rao_scale(
    report: &CriticalityReport,
    n: usize,
    a: i64,
    range: f64,
) -> Result<f64, PathError> {
    if n == 0 {
        return Err(PathError::Range("horizon must be positive".into()));
    }
    let nf = n as f64;
    if (a as f64).abs() > range * nf.sqrt() {
        return Err(PathError::Range(format!(
            "|a| = {} exceeds {range}·sqrt({n})",
            a.abs()
        )));
    }
    let ln = -(a as f64) * report.lambda_star - nf * report.f_star
        - 0.5 * (2.0 * PI * nf * report.variance_at_tilt).ln();
    Ok(ln.exp())
}

/// The order-of-magnitude formulas for the ballot-type events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallotKind {
    /// `S_n = k`, `S_i >= -m`: `(m+1)(k+m+1)/n^{3/2}`.
    Mean0,
    /// `S_n = k`, `0 <= S_i < k`: `(k+1)/n^2`.
    Fnk,
    /// The `(k, n)`-useful walks: `(k+1)/n^2`.
    Gnk,
    /// `S_n = k`, `0 <= S_i <= k`, `S_m = j`:
    /// `(j+1)^2 (k+1) / (m^{3/2} (n-m)^2)`.
    Pinned { j: i64 },
}

/// Evaluates the ballot formula of `kind`. `m` is the depth of the lower
/// barrier for [`BallotKind::Mean0`] and the pin index for
/// [`BallotKind::Pinned`]; the other kinds ignore it.
pub fn ballot_asymptotic(
    kind: BallotKind,
    n: usize,
    k: i64,
    m: i64,
    c: f64,
) -> Result<f64, PathError> {
    let out = |what: &str| Err(PathError::Range(format!("{what} (n={n}, k={k}, m={m}, c={c})")));
    if n == 0 {
        return out("horizon must be positive");
    }
    let nf = n as f64;
    let root = nf.sqrt();
    let kf = k as f64;
    let mf = m as f64;
    match kind {
        BallotKind::Mean0 => {
            if !(k > 0 && kf <= c * root) {
                return out("need 0 < k <= c·sqrt(n)");
            }
            if !(m >= 0 && mf <= c * root) {
                return out("need 0 <= m <= c·sqrt(n)");
            }
            Ok((mf + 1.0) * (kf + mf + 1.0) / nf.powf(1.5))
        }
        BallotKind::Fnk | BallotKind::Gnk => {
            if !(c > 1.0 && kf / root >= 1.0 / c && kf / root <= c) {
                return out("need 1/c <= k/sqrt(n) <= c with c > 1");
            }
            Ok((kf + 1.0) / (nf * nf))
        }
        BallotKind::Pinned { j } => {
            if !(kf / root > 1.0 / c && kf / root <= c) {
                return out("need 1/c < k/sqrt(n) <= c");
            }
            if !(m >= 1 && 2 * m as usize <= n) {
                return out("need 1 <= m <= n/2");
            }
            let jf = j as f64;
            if !(j >= 0 && jf <= mf.sqrt() && jf <= kf / 2.0) {
                return out("need 0 <= j <= min(sqrt(m), k/2)");
            }
            Ok((jf + 1.0).powi(2) * (kf + 1.0) / (mf.powf(1.5) * (nf - mf).powi(2)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify, OffspringLaw};

    fn pemantle_report() -> CriticalityReport {
        classify(&StepLaw::pemantle(), &OffspringLaw::constant(2)).unwrap()
    }

    #[test]
    fn chernoff_values() {
        let report = pemantle_report();
        let one = chernoff_bound_at_star(&report, 1, 1.0);
        assert!((one - (2.0 - 3f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(chernoff_bound_at_star(&report, 0, 0.0), 1.0);
        let hundred = chernoff_bound_at_star(&report, 100, 0.0);
        assert!((hundred / 2f64.powi(-100) - 1.0).abs() < 1e-12);
        let direct = chernoff_bound(&StepLaw::pemantle(), report.lambda_star, 1, 1.0).unwrap();
        assert!((direct - one).abs() < 1e-12);
        assert!(chernoff_bound(&StepLaw::pemantle(), 0.0, 1, 1.0).is_err());
    }

    #[test]
    fn bahadur_rao_values() {
        let report = pemantle_report();
        let base = bahadur_rao_scale(&report, 100, 0, DEFAULT_LOCAL_RANGE).unwrap();
        let expected = 2f64.powi(-100) / (200.0 * PI).sqrt();
        assert!((base / expected - 1.0).abs() < 1e-9);
        assert!((200.0 * PI).sqrt() - 25.0663 < 1e-4);
        let shifted = bahadur_rao_scale(&report, 100, 10, DEFAULT_LOCAL_RANGE).unwrap();
        assert!((shifted / (base * (2.0 + 3f64.sqrt()).powi(-10)) - 1.0).abs() < 1e-9);
        let n = 50;
        let ratio = bahadur_rao_scale(&report, 4 * n, 0, DEFAULT_LOCAL_RANGE).unwrap()
            / bahadur_rao_scale(&report, n, 0, DEFAULT_LOCAL_RANGE).unwrap();
        let expected = (-3.0 * n as f64 * report.f_star).exp() / 2.0;
        assert!((ratio / expected - 1.0).abs() < 1e-9);
        assert!(bahadur_rao_scale(&report, 100, 31, DEFAULT_LOCAL_RANGE).is_err());
        assert!(bahadur_rao_scale(&report, 0, 0, DEFAULT_LOCAL_RANGE).is_err());
    }

    #[test]
    fn ballot_formula_values() {
        let c = DEFAULT_BALLOT_RANGE;
        let v = ballot_asymptotic(BallotKind::Mean0, 400, 20, 0, c).unwrap();
        assert!((v - 0.002625).abs() < 1e-15);
        let f = ballot_asymptotic(BallotKind::Fnk, 400, 20, 0, c).unwrap();
        assert!((f - 21.0 / 160000.0).abs() < 1e-18);
        let small = ballot_asymptotic(BallotKind::Mean0, 100, 10, 0, c).unwrap();
        assert!((v / small - 0.2386).abs() < 1e-4);
        let g = ballot_asymptotic(BallotKind::Gnk, 400, 20, 0, c).unwrap();
        assert_eq!(f, g);
        let p = ballot_asymptotic(BallotKind::Pinned { j: 3 }, 1600, 40, 400, c).unwrap();
        assert!((p - 16.0 * 41.0 / (8000.0 * 1200f64.powi(2))).abs() < 1e-18);
    }

    #[test]
    fn ballot_ranges() {
        let c = DEFAULT_BALLOT_RANGE;
        assert!(ballot_asymptotic(BallotKind::Mean0, 400, 0, 0, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Mean0, 400, 41, 0, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Mean0, 400, 5, -1, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Fnk, 400, 5, 0, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Pinned { j: 21 }, 1600, 40, 400, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Pinned { j: 1 }, 1600, 40, 801, c).is_err());
        assert!(ballot_asymptotic(BallotKind::Fnk, 0, 1, 0, c).is_err());
    }
}
