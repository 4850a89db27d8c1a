use serde::{Deserialize, Serialize};

use super::{ModelError, OffspringLaw, StepLaw};

/// Half-width of the band around `log E B` inside which a walk is called critical.
pub const CRITICAL_BAND: f64 = 1e-9;

const ROOT_WIDTH: f64 = 1e-14;
const SLOPE_TOLERANCE: f64 = 1e-10;

/// `Λ(λ)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulant {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Evaluates the cumulant generating function of `law` at `lambda`.
///
/// Exponents are shifted by `max(λx)` so that the weights never overflow.
pub fn cumulant(law: &StepLaw, lambda: f64) -> Result<Cumulant, ModelError> {
    if !lambda.is_finite() {
        return Err(ModelError::NonFinite(lambda));
    }
    let shift = law
        .support()
        .iter()
        .map(|&(x, _)| lambda * x as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<(f64, f64)> = law
        .support()
        .iter()
        .map(|&(x, p)| (x as f64, p * (lambda * x as f64 - shift).exp()))
        .collect();
    let mass: f64 = weights.iter().map(|&(_, w)| w).sum();
    let slope = weights.iter().map(|&(x, w)| x * w).sum::<f64>() / mass;
    let curvature = weights
        .iter()
        .map(|&(x, w)| (x - slope).powi(2) * w)
        .sum::<f64>()
        / mass;
    let value = shift + mass.ln();
    if !(value.is_finite() && slope.is_finite() && curvature.is_finite()) {
        return Err(ModelError::NonFinite(lambda));
    }
    Ok(Cumulant {
        value,
        slope,
        curvature,
    })
}

/// The positive root of `Λ'` and the quantities evaluated there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaStar {
    pub lambda_star: f64,
    /// `Λ(λ*)`.
    pub lambda_value: f64,
    /// `f(λ*) = λ*Λ'(λ*) - Λ(λ*)`.
    pub f_star: f64,
    /// `Λ''(λ*)`.
    pub variance_at_tilt: f64,
    /// Residual `Λ'(λ*)`.
    pub slope_residual: f64,
}

/// Locates `λ* > 0` with `Λ'(λ*) = 0`: bisection down to a bracket of width
/// 1e-14, then two Newton steps.
pub fn find_lambda_star(law: &StepLaw) -> Result<LambdaStar, ModelError> {
    if law.mean() >= 0.0 {
        return Err(ModelError::NotWellControlled(format!(
            "mean step {} is not negative",
            law.mean()
        )));
    }
    if law.max_step() <= 0 {
        return Err(ModelError::NotWellControlled(
            "no positive support point".into(),
        ));
    }
    let slope = |l: f64| cumulant(law, l).map(|c| c.slope);

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while slope(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(ModelError::NoBracket);
        }
    }
    while hi - lo > ROOT_WIDTH * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..2 {
        let c = cumulant(law, lambda)?;
        let next = lambda - c.slope / c.curvature;
        if next.is_finite() && next > 0.0 {
            lambda = next;
        }
    }
    let c = cumulant(law, lambda)?;
    debug_assert!(c.slope.abs() <= SLOPE_TOLERANCE, "residual {}", c.slope);
    if c.slope.abs() > SLOPE_TOLERANCE {
        return Err(ModelError::NoBracket);
    }
    Ok(LambdaStar {
        lambda_star: lambda,
        lambda_value: c.value,
        f_star: lambda * c.slope - c.value,
        variance_at_tilt: c.curvature,
        slope_residual: c.slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Supercritical,
    Critical,
    Subcritical,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Supercritical => "supercritical",
            Verdict::Critical => "critical",
            Verdict::Subcritical => "subcritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostic {
    pub b_log8_b: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub lambda_star: f64,
    pub lambda_value: f64,
    pub f_star: f64,
    pub log_mean_offspring: f64,
    pub variance_at_tilt: f64,
    pub verdict: Verdict,
    pub critical_band: f64,
    pub moment_diagnostic: MomentDiagnostic,
}

impl CriticalityReport {
    /// `f(λ*) - log E B`: positive when subcritical, negative when supercritical.
    pub fn gap(&self) -> f64 {
        self.f_star - self.log_mean_offspring
    }
}

/// Compares `f(λ*)` with `log E B`.
pub fn classify(step: &StepLaw, offspring: &OffspringLaw) -> Result<CriticalityReport, ModelError> {
    offspring.require_supercritical()?;
    let star = find_lambda_star(step)?;
    let log_mean = offspring.log_mean();
    let gap = star.f_star - log_mean;
    let verdict = if gap.abs() <= CRITICAL_BAND {
        Verdict::Critical
    } else if gap > 0.0 {
        Verdict::Subcritical
    } else {
        Verdict::Supercritical
    };
    let b_log8_b = offspring.b_log8_b();
    Ok(CriticalityReport {
        lambda_star: star.lambda_star,
        lambda_value: star.lambda_value,
        f_star: star.f_star,
        log_mean_offspring: log_mean,
        variance_at_tilt: star.variance_at_tilt,
        verdict,
        critical_band: CRITICAL_BAND,
        moment_diagnostic: MomentDiagnostic {
            b_log8_b,
            finite: b_log8_b.is_finite(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt3() -> f64 {
        3f64.sqrt()
    }

    #[test]
    fn cumulant_at_zero_gives_moments() {
        let law: StepLaw = "-2:0.3,0:0.2,1:0.4,3:0.1".parse().unwrap();
        let c = cumulant(&law, 0.0).unwrap();
        assert_eq!(c.value, 0.0);
        assert!((c.slope - law.mean()).abs() < 1e-15);
        assert!((c.curvature - law.variance()).abs() < 1e-14);
    }

    #[test]
    fn pemantle_cumulant_closed_form() {
        let law = StepLaw::pemantle();
        let c = cumulant(&law, (2.0 + sqrt3()).ln()).unwrap();
        assert!((c.value + 2f64.ln()).abs() < 1e-15);
        assert!(c.slope.abs() < 1e-15);
        assert!((c.curvature - 1.0).abs() < 1e-15);
        let c0 = cumulant(&law, 0.0).unwrap();
        assert!((c0.slope + sqrt3() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_guarded() {
        let law: StepLaw = "-50:0.5,50:0.5".parse().unwrap();
        let c = cumulant(&law, 40.0).unwrap();
        assert!((c.value - (2000.0 + 0.5f64.ln())).abs() < 1e-9);
        assert!(cumulant(&law, f64::INFINITY).is_err());
    }

    #[test]
    fn lambda_star_pemantle() {
        let star = find_lambda_star(&StepLaw::pemantle()).unwrap();
        assert!((star.lambda_star - (2.0 + sqrt3()).ln()).abs() < 1e-9);
        assert!((star.lambda_star - 1.3169579).abs() < 1e-7);
        assert!((star.f_star - 2f64.ln()).abs() < 1e-12);
        assert!((star.variance_at_tilt - 1.0).abs() < 1e-12);
        assert!(star.slope_residual.abs() <= 1e-10);
    }

    #[test]
    fn lambda_star_skewed_law() {
        let law: StepLaw = "2:0.1,-1:0.9".parse().unwrap();
        let star = find_lambda_star(&law).unwrap();
        // 0.2 e^{2λ} = 0.9 e^{-λ}
        let closed = 4.5f64.ln() / 3.0;
        assert!((star.lambda_star - closed).abs() < 1e-12);
        assert!((star.lambda_star - 0.5013).abs() < 1e-4);
    }

    #[test]
    fn zero_drift_is_not_well_controlled() {
        let law: StepLaw = "-1:0.5,1:0.5".parse().unwrap();
        assert!(matches!(
            find_lambda_star(&law),
            Err(ModelError::NotWellControlled(_))
        ));
        let law: StepLaw = "-1:0.5,0:0.5".parse().unwrap();
        assert!(matches!(
            find_lambda_star(&law),
            Err(ModelError::NotWellControlled(_))
        ));
    }

    #[test]
    fn classify_pemantle_family() {
        let two = OffspringLaw::constant(2);
        let report = classify(&StepLaw::pemantle(), &two).unwrap();
        assert_eq!(report.verdict, Verdict::Critical);

        let report = classify(&StepLaw::plus_minus_one(0.2).unwrap(), &two).unwrap();
        assert_eq!(report.verdict, Verdict::Supercritical);
        assert!((report.f_star + 0.8f64.ln()).abs() < 1e-12);

        let report = classify(&StepLaw::plus_minus_one(0.01).unwrap(), &two).unwrap();
        assert_eq!(report.verdict, Verdict::Subcritical);
        let expected = -(2.0 * 0.0099f64.sqrt()).ln();
        assert!((report.f_star - expected).abs() < 1e-12);
        assert!((report.f_star - 1.61).abs() < 0.01);
    }

    #[test]
    fn classify_requires_supercritical_branching() {
        let err = classify(&StepLaw::pemantle(), &OffspringLaw::constant(1)).unwrap_err();
        assert!(matches!(err, ModelError::NotSupercriticalBranching(_)));
    }

    #[test]
    fn report_is_deterministic() {
        let law = StepLaw::pemantle();
        let b: OffspringLaw = "poisson:2".parse().unwrap();
        let a = serde_json::to_string(&classify(&law, &b).unwrap()).unwrap();
        let c = serde_json::to_string(&classify(&law, &b).unwrap()).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn verdict_flips_once_across_critical_p() {
        let two = OffspringLaw::constant(2);
        let critical = (2.0 - sqrt3()) / 4.0;
        let verdicts: Vec<Verdict> = (1..400)
            .map(|i| i as f64 * 0.0005)
            .chain([critical])
            .map(|p| (p, classify(&StepLaw::plus_minus_one(p).unwrap(), &two).unwrap()))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(_, r)| r.verdict)
            .collect();
        // grid is increasing in p except the appended critical point
        let grid = &verdicts[..verdicts.len() - 1];
        let changes = grid.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
        assert_eq!(grid[0], Verdict::Subcritical);
        assert_eq!(*grid.last().unwrap(), Verdict::Supercritical);
        assert_eq!(*verdicts.last().unwrap(), Verdict::Critical);
    }

    fn finite_difference_check(law: &StepLaw, lambda: f64) {
        let h = 1e-5;
        let c = cumulant(law, lambda).unwrap();
        let up = cumulant(law, lambda + h).unwrap().value;
        let down = cumulant(law, lambda - h).unwrap().value;
        let fd_slope = (up - down) / (2.0 * h);
        let fd_curv = (up - 2.0 * c.value + down) / (h * h);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
        assert!(rel(fd_slope, c.slope) < 1e-6, "slope {fd_slope} vs {}", c.slope);
        // second differences lose about half the digits; compare against the
        // slope's own finite difference instead of the raw three-point stencil
        let s_up = cumulant(law, lambda + h).unwrap().slope;
        let s_down = cumulant(law, lambda - h).unwrap().slope;
        let fd_curv2 = (s_up - s_down) / (2.0 * h);
        assert!(rel(fd_curv2, c.curvature) < 1e-6, "curvature {fd_curv2} vs {}", c.curvature);
        // the raw stencil carries rounding error of order eps·|Λ|/h²
        assert!((fd_curv - c.curvature).abs() < 1e-3 * (1.0 + c.value.abs()));
    }

    #[test]
    fn derivatives_match_finite_differences_on_fixed_laws() {
        let laws = [
            StepLaw::pemantle(),
            "2:0.1,-1:0.9".parse().unwrap(),
            "-3:0.2,-1:0.3,0:0.1,1:0.25,4:0.15".parse().unwrap(),
        ];
        for law in &laws {
            for lambda in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
                finite_difference_check(law, lambda);
            }
        }
    }

    prop_compose! {
        fn arb_law()(points in proptest::collection::btree_map(-5i64..=5, 0.05f64..1.0, 2..6)) -> StepLaw {
            let total: f64 = points.values().sum();
            StepLaw::new(points.into_iter().map(|(x, w)| (x, w / total))).unwrap()
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(law in arb_law(), idx in 0usize..6) {
            let lambda = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0][idx];
            finite_difference_check(&law, lambda);
        }

        #[test]
        fn lambda_star_zeroes_the_slope(law in arb_law()) {
            prop_assume!(law.mean() < -1e-3 && law.max_step() > 0);
            let star = find_lambda_star(&law).unwrap();
            prop_assert!(star.lambda_star > 0.0);
            prop_assert!(star.slope_residual.abs() <= 1e-10);
            prop_assert!((star.f_star + star.lambda_value).abs() < 1e-9);
            prop_assert!(star.variance_at_tilt > 0.0);
        }
    }
}
