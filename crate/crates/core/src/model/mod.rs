//! Step and offspring laws and the large-deviation analysis built on them.
//!
//! The step `X` has finite support on the integers, so its cumulant
//! generating function `Λ(λ) = log E e^{λX}` is finite for every real `λ`.
//! A step law is *well-controlled* when `Λ'` has a positive root `λ*`; the
//! rate `f(λ) = λΛ'(λ) - Λ(λ)` evaluated there is compared with `log E B`
//! to classify the branching random walk.

mod criticality;
mod offspring;
mod step;
mod tilt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

pub use criticality::{
    classify, cumulant, find_lambda_star, CriticalityReport, Cumulant, LambdaStar,
    MomentDiagnostic, Verdict, CRITICAL_BAND,
};
pub use offspring::{OffspringKind, OffspringLaw, TRUNCATION_TAIL};
pub use step::{StepLaw, MASS_TOLERANCE};
pub use tilt::{tilt, TiltedStepLaw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed law: {0}")]
    Syntax(String),
    #[error("law has empty support")]
    EmptySupport,
    #[error("support point {0} appears twice")]
    DuplicateSupport(i64),
    #[error("probability {prob} at {value} is outside (0, 1]")]
    BadProbability { value: i64, prob: f64 },
    #[error("probabilities sum to {0}, not 1")]
    MassNotOne(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("support lies on a proper sublattice of the integers (span {0})")]
    LatticeSpan(u64),
    #[error("step law is not well-controlled: {0}")]
    NotWellControlled(String),
    #[error("no bracket found for the root of the cumulant slope")]
    NoBracket,
    #[error("cumulant is not finite at lambda = {0}")]
    NonFinite(f64),
    #[error("mean offspring {0} does not exceed 1")]
    NotSupercriticalBranching(f64),
}

impl ModelError {
    /// Whether the error is a text-format problem rather than a semantic one.
    pub fn is_syntax(&self) -> bool {
        matches!(self, ModelError::Syntax(_))
    }
}

/// Parses `0.25`, `1/4`, or `1e-3`; returns the float and, when the text is
/// a plain decimal or a fraction, the exact rational it denotes.
pub(crate) fn parse_probability(text: &str) -> Result<(f64, Option<BigRational>), ModelError> {
    let bad = || ModelError::Syntax(format!("bad probability {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        let q = BigRational::new(num, den);
        let f = num_traits::ToPrimitive::to_f64(&q).ok_or_else(bad)?;
        return Ok((f, Some(q)));
    }
    let f: f64 = text.parse().map_err(|_| bad())?;
    Ok((f, decimal_rational(text)))
}

fn decimal_rational(text: &str) -> Option<BigRational> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numerator: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denominator = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numerator, denominator);
    Some(if negative { -q } else { q })
}
