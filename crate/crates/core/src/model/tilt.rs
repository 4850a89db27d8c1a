use super::{cumulant, ModelError, StepLaw};

/// The exponentially tilted law `P'(x) = P(x) e^{λx - Λ(λ)}` on the same support.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedStepLaw {
    lambda: f64,
    base_cumulant: f64,
    offset: f64,
    law: StepLaw,
}

pub fn tilt(law: &StepLaw, lambda: f64) -> Result<TiltedStepLaw, ModelError> {
    let c = cumulant(law, lambda)?;
    let raw: Vec<(i64, f64)> = law
        .support()
        .iter()
        .map(|&(x, p)| (x, p * (lambda * x as f64 - c.value).exp()))
        .collect();
    // renormalize away the last-ulp drift so the tilted law passes the mass check
    let total: f64 = raw.iter().map(|&(_, p)| p).sum();
    let tilted = StepLaw::new(raw.into_iter().map(|(x, p)| (x, p / total)))?;
    Ok(TiltedStepLaw {
        lambda,
        base_cumulant: c.value,
        offset: c.slope,
        law: tilted,
    })
}

impl TiltedStepLaw {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Λ(λ)` of the base law.
    pub fn base_cumulant(&self) -> f64 {
        self.base_cumulant
    }

    /// `Λ'(λ)`, the mean of the tilted law.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn law(&self) -> &StepLaw {
        &self.law
    }

    pub fn mean(&self) -> f64 {
        self.law.mean()
    }

    pub fn variance(&self) -> f64 {
        self.law.variance()
    }

    /// Support points of the centered variable `x - Λ'(λ)` with their probabilities.
    pub fn centered(&self) -> Vec<(f64, f64)> {
        self.law
            .support()
            .iter()
            .map(|&(x, p)| (x as f64 - self.offset, p))
            .collect()
    }
}
