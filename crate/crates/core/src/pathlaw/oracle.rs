use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{PathError, PathQuery};

/// Longest horizon the enumeration oracles accept.
pub const ORACLE_MAX_HORIZON: usize = 24;

fn check_horizon(q: &PathQuery) -> Result<(), PathError> {
    q.validate()?;
    if q.horizon() > ORACLE_MAX_HORIZON {
        return Err(PathError::TooLargeForOracle(q.horizon()));
    }
    Ok(())
}

/// Visits every admissible path, calling `leaf` with the step indices taken.
/// Branches leaving the profile are cut as soon as they leave it.
fn enumerate(q: &PathQuery, mut leaf: impl FnMut(&[usize])) {
    let n = q.horizon();
    if !q.profile.admits(0, 0) {
        return;
    }
    if n == 0 {
        if q.terminal.admits(0) {
            leaf(&[]);
        }
        return;
    }
    let steps: Vec<i64> = q.step.support().iter().map(|&(x, _)| x).collect();
    let mut choice: Vec<usize> = Vec::with_capacity(n);
    let mut position: Vec<i64> = vec![0];
    let mut next = 0usize;
    loop {
        if next < steps.len() {
            let depth = choice.len() + 1;
            let s = position[depth - 1] + steps[next];
            let ok = q.profile.admits(depth, s) && (depth < n || q.terminal.admits(s));
            if ok {
                choice.push(next);
                if depth == n {
                    leaf(&choice);
                    choice.pop();
                    next += 1;
                } else {
                    position.push(s);
                    next = 0;
                }
            } else {
                next += 1;
            }
        } else {
            let Some(last) = choice.pop() else { break };
            position.pop();
            next = last + 1;
        }
    }
}

/// Exact probability by brute-force enumeration in rational arithmetic.
///
/// Uses the rational step probabilities when the law was given as decimals
/// or fractions, and otherwise the exact binary values of the stored floats.
/// Needs `n <= ORACLE_MAX_HORIZON`.
pub fn path_probability_exact(q: &PathQuery) -> Result<BigRational, PathError> {
    check_horizon(q)?;
    let exact: Vec<BigRational> = match q.step.exact_probabilities() {
        Some(e) => e.to_vec(),
        None => q
            .step
            .support()
            .iter()
            .map(|&(_, p)| BigRational::from_float(p).expect("finite probability"))
            .collect(),
    };
    // common denominator so each path contributes an integer numerator
    let denom = exact
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let weights: Vec<BigInt> = exact
        .iter()
        .map(|r| r.numer() * (&denom / r.denom()))
        .collect();
    let mut total = BigInt::zero();
    let mut partial: Vec<BigInt> = vec![BigInt::one()];
    let mut previous: Vec<usize> = Vec::new();
    enumerate(q, |path| {
        // reuse prefix products shared with the previous path
        let shared = previous
            .iter()
            .zip(path)
            .take_while(|(a, b)| a == b)
            .count();
        partial.truncate(shared + 1);
        previous.clear();
        previous.extend_from_slice(path);
        for &j in &path[shared..] {
            let next = partial.last().unwrap() * &weights[j];
            partial.push(next);
        }
        total += partial.last().unwrap();
    });
    let n = q.horizon();
    Ok(BigRational::new(total, num_traits::pow(denom, n)))
}

/// Float enumeration, for step laws without exact probabilities.
pub fn path_probability_enumerated(q: &PathQuery) -> Result<f64, PathError> {
    check_horizon(q)?;
    let probs: Vec<f64> = q.step.support().iter().map(|&(_, p)| p).collect();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    enumerate(q, |path| {
        let term: f64 = path.iter().map(|&j| probs[j]).product();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    });
    Ok(sum + comp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StepLaw;
    use crate::pathlaw::{BarrierProfile, TerminalCondition};

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn dyck_paths() {
        let q = PathQuery::new(
            "-1:1/2,1:1/2".parse().unwrap(),
            BarrierProfile::one_sided(4, 0),
            TerminalCondition::Equals(0),
        );
        assert_eq!(path_probability_exact(&q).unwrap(), ratio(1, 8));
    }

    #[test]
    fn empty_horizon() {
        let q = PathQuery::new(
            "-1:0.25,1:0.75".parse().unwrap(),
            BarrierProfile::unconstrained(0),
            TerminalCondition::Equals(0),
        );
        assert_eq!(path_probability_exact(&q).unwrap(), BigRational::one());
        assert_eq!(path_probability_enumerated(&q).unwrap(), 1.0);
    }

    #[test]
    fn quarter_walk_excursion() {
        // p(1-p) with p = 1/4
        let q = PathQuery::new(
            "-1:3/4,1:1/4".parse().unwrap(),
            BarrierProfile::one_sided(2, 0),
            TerminalCondition::Equals(0),
        );
        assert_eq!(path_probability_exact(&q).unwrap(), ratio(3, 16));
    }

    #[test]
    fn float_laws_use_their_binary_values() {
        let q = PathQuery::new(
            StepLaw::pemantle(),
            BarrierProfile::one_sided(2, 0),
            TerminalCondition::Equals(0),
        );
        let law = StepLaw::pemantle();
        let (p, q_) = (law.prob(1), law.prob(-1));
        let expected = BigRational::from_float(p).unwrap() * BigRational::from_float(q_).unwrap();
        assert_eq!(path_probability_exact(&q).unwrap(), expected);
        assert!((path_probability_enumerated(&q).unwrap() - 0.0625).abs() < 1e-16);
    }

    #[test]
    fn horizon_limit() {
        let q = PathQuery::new(
            "-1:1/2,1:1/2".parse().unwrap(),
            BarrierProfile::unconstrained(25),
            TerminalCondition::AtLeast(0),
        );
        assert_eq!(
            path_probability_exact(&q),
            Err(PathError::TooLargeForOracle(25))
        );
    }

    #[test]
    fn unconstrained_mass_is_one() {
        let q = PathQuery::new(
            "-2:1/3,0:1/6,1:1/2".parse().unwrap(),
            BarrierProfile::unconstrained(6),
            TerminalCondition::AtLeast(-100),
        );
        assert_eq!(path_probability_exact(&q).unwrap(), BigRational::one());
    }
}
