use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::model::{OffspringLaw, StepLaw};

#[derive(Debug, Clone)]
pub(crate) enum StepSampler {
    Point(i64),
    Two { low: i64, high: i64, p_high: f64 },
    Table { values: Vec<i64>, index: WeightedIndex<f64> },
}

impl StepSampler {
    pub(crate) fn new(law: &StepLaw) -> Self {
        match law.support() {
            [(x, _)] => StepSampler::Point(*x),
            [(low, _), (high, p)] => StepSampler::Two {
                low: *low,
                high: *high,
                p_high: *p,
            },
            support => StepSampler::Table {
                values: support.iter().map(|&(x, _)| x).collect(),
                index: WeightedIndex::new(support.iter().map(|&(_, p)| p))
                    .expect("validated law"),
            },
        }
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            StepSampler::Point(x) => *x,
            StepSampler::Two { low, high, p_high } => {
                if rng.gen::<f64>() < *p_high {
                    *high
                } else {
                    *low
                }
            }
            StepSampler::Table { values, index } => values[index.sample(rng)],
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CountSampler {
    Constant(u32),
    Table { values: Vec<u32>, index: WeightedIndex<f64> },
}

impl CountSampler {
    pub(crate) fn from_table(table: &[(u32, f64)]) -> Self {
        match table {
            [(k, _)] => CountSampler::Constant(*k),
            _ => CountSampler::Table {
                values: table.iter().map(|&(k, _)| k).collect(),
                index: WeightedIndex::new(table.iter().map(|&(_, p)| p)).expect("validated law"),
            },
        }
    }

    pub(crate) fn offspring(law: &OffspringLaw) -> Self {
        Self::from_table(law.probabilities())
    }

    /// Samples `B̂ - 1`, the off-spine children of a spine node.
    pub(crate) fn off_spine(law: &OffspringLaw) -> Self {
        let shifted: Vec<(u32, f64)> = law
            .size_biased()
            .into_iter()
            .map(|(k, p)| (k - 1, p))
            .collect();
        Self::from_table(&shifted)
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            CountSampler::Constant(k) => *k,
            CountSampler::Table { values, index } => values[index.sample(rng)],
        }
    }
}
