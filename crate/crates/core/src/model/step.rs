use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{parse_probability, ModelError};

/// Tolerance on the total mass of a step or offspring table.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A finite-support step distribution on the integer lattice.
///
/// Support points are kept sorted by value. When the law was built from
/// rational probabilities (decimal or `a/b` text, or [`StepLaw::from_rationals`])
/// the exact values are retained for the enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLaw {
    support: Vec<(i64, f64)>,
    exact: Option<Vec<BigRational>>,
    mean: f64,
    variance: f64,
    abs_third: f64,
    span: u64,
    lattice: u64,
}

impl StepLaw {
    pub fn new(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, ModelError> {
        let mut support: Vec<(i64, f64)> = pairs.into_iter().collect();
        if support.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        support.sort_by_key(|&(x, _)| x);
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::DuplicateSupport(w[0].0));
            }
        }
        for &(x, p) in &support {
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                return Err(ModelError::BadProbability { value: x, prob: p });
            }
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(ModelError::MassNotOne(total));
        }

        let mean: f64 = support.iter().map(|&(x, p)| x as f64 * p).sum();
        let variance = support
            .iter()
            .map(|&(x, p)| (x as f64 - mean).powi(2) * p)
            .sum();
        let abs_third = support.iter().map(|&(x, p)| (x as f64).abs().powi(3) * p).sum();
        let first = support[0].0;
        let span = support
            .iter()
            .fold(0u64, |g, &(x, _)| g.gcd(&(x - first).unsigned_abs()));
        let lattice = support
            .iter()
            .fold(0u64, |g, &(x, _)| g.gcd(&x.unsigned_abs()));

        Ok(StepLaw {
            support,
            exact: None,
            mean,
            variance,
            abs_third,
            span,
            lattice,
        })
    }

    /// Builds a law whose probabilities are exact rationals; they must sum to exactly one.
    pub fn from_rationals(
        pairs: impl IntoIterator<Item = (i64, BigRational)>,
    ) -> Result<Self, ModelError> {
        let mut pairs: Vec<(i64, BigRational)> = pairs.into_iter().collect();
        pairs.sort_by_key(|(x, _)| *x);
        let total = pairs
            .iter()
            .fold(BigRational::zero(), |acc, (_, p)| acc + p);
        if total != BigRational::from_integer(1.into()) {
            return Err(ModelError::MassNotOne(total.to_f64().unwrap_or(f64::NAN)));
        }
        let floats = pairs
            .iter()
            .map(|(x, p)| (*x, p.to_f64().unwrap_or(f64::NAN)))
            .collect::<Vec<_>>();
        let mut law = StepLaw::new(floats)?;
        law.exact = Some(pairs.into_iter().map(|(_, p)| p).collect());
        Ok(law)
    }

    /// The two-point law on {-1, +1} with `P(X = 1) = p`.
    pub fn plus_minus_one(p: f64) -> Result<Self, ModelError> {
        StepLaw::new([(-1, 1.0 - p), (1, p)])
    }

    /// The exactly critical {-1, +1} law for a given mean offspring number:
    /// the smaller root of `4 p (1 - p) (E B)^2 = 1`.
    pub fn critical_plus_minus_one(mean_offspring: f64) -> Result<Self, ModelError> {
        if !(mean_offspring > 1.0) {
            return Err(ModelError::NotSupercriticalBranching(mean_offspring));
        }
        let p = 0.5 * (1.0 - (1.0 - mean_offspring.powi(-2)).sqrt());
        StepLaw::plus_minus_one(p)
    }

    /// The critical {-1, +1} law for binary branching, `p = (2 - sqrt 3) / 4`.
    pub fn pemantle() -> Self {
        StepLaw::plus_minus_one((2.0 - 3f64.sqrt()) / 4.0).expect("valid two-point law")
    }

    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    pub fn exact_probabilities(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn abs_third_moment(&self) -> f64 {
        self.abs_third
    }

    /// gcd of pairwise differences of support points (0 for a point mass).
    pub fn span(&self) -> u64 {
        self.span
    }

    pub fn min_step(&self) -> i64 {
        self.support[0].0
    }

    pub fn max_step(&self) -> i64 {
        self.support[self.support.len() - 1].0
    }

    pub fn max_abs_step(&self) -> i64 {
        self.min_step().abs().max(self.max_step().abs())
    }

    pub fn prob(&self, x: i64) -> f64 {
        self.support
            .binary_search_by_key(&x, |&(v, _)| v)
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    /// gcd of the support points: walks started at 0 live on `lattice·ℤ`.
    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    /// Fails unless walks driven by this law can reach every integer, i.e.
    /// the support points have gcd 1. The ±1 walk passes (its span is 2).
    pub fn require_integer_lattice(&self) -> Result<(), ModelError> {
        if self.lattice == 1 {
            Ok(())
        } else {
            Err(ModelError::LatticeSpan(self.span))
        }
    }

    /// The law of `-X`.
    pub fn negated(&self) -> StepLaw {
        let mut support: Vec<(i64, f64)> = self.support.iter().map(|&(x, p)| (-x, p)).collect();
        support.reverse();
        let exact = self.exact.as_ref().map(|e| e.iter().rev().cloned().collect());
        StepLaw {
            support,
            exact,
            mean: -self.mean,
            variance: self.variance,
            abs_third: self.abs_third,
            span: self.span,
            lattice: self.lattice,
        }
    }
}

impl fmt::Display for StepLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, p)) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match &self.exact {
                Some(exact) => write!(f, "{}:{}", x, exact[i])?,
                None => write!(f, "{}:{}", x, p)?,
            }
        }
        Ok(())
    }
}

/// Parses `value:prob` pairs separated by commas, e.g. `-1:0.9330127,1:0.0669873`.
/// Probabilities written as decimals or `a/b` fractions are kept exactly.
impl FromStr for StepLaw {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut floats = Vec::new();
        let mut exact = Vec::new();
        for item in s.split(',').map(str::trim) {
            let (value, prob) = item
                .split_once(':')
                .ok_or_else(|| ModelError::Syntax(format!("expected value:prob, got {item:?}")))?;
            let value: i64 = value
                .trim()
                .parse()
                .map_err(|_| ModelError::Syntax(format!("bad support value {value:?}")))?;
            let (p, q) = parse_probability(prob.trim())?;
            floats.push((value, p));
            exact.push(q.map(|q| (value, q)));
        }
        let law = StepLaw::new(floats)?;
        match exact.into_iter().collect::<Option<Vec<_>>>() {
            Some(pairs) => {
                let total = pairs.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
                if total == BigRational::from_integer(1.into()) {
                    StepLaw::from_rationals(pairs)
                } else {
                    Ok(law)
                }
            }
            None => Ok(law),
        }
    }
}
