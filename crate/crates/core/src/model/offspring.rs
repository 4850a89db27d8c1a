use std::fmt;
use std::str::FromStr;

use super::step::MASS_TOLERANCE;
use super::{parse_probability, ModelError};

/// Unbounded offspring laws are cut where the upper tail drops below this mass.
pub const TRUNCATION_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum OffspringKind {
    Constant(u32),
    Table,
    /// `P(B = k) = q (1 - q)^k` for `k >= 0`.
    Geometric(f64),
    Poisson(f64),
}

/// The branching law `B`, always held as a finite table.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    kind: OffspringKind,
    table: Vec<(u32, f64)>,
    mean: f64,
}

impl OffspringLaw {
    pub fn constant(k: u32) -> Self {
        OffspringLaw {
            kind: OffspringKind::Constant(k),
            table: vec![(k, 1.0)],
            mean: k as f64,
        }
    }

    pub fn finite(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, ModelError> {
        let mut table: Vec<(u32, f64)> = pairs.into_iter().collect();
        if table.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        table.sort_by_key(|&(k, _)| k);
        for w in table.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::DuplicateSupport(w[0].0 as i64));
            }
        }
        for &(k, p) in &table {
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                return Err(ModelError::BadProbability {
                    value: k as i64,
                    prob: p,
                });
            }
        }
        let total: f64 = table.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(ModelError::MassNotOne(total));
        }
        Ok(Self::from_table(OffspringKind::Table, table))
    }

    pub fn geometric(q: f64) -> Result<Self, ModelError> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(ModelError::BadParameter(format!("geometric q = {q}")));
        }
        let mut table = Vec::new();
        let mut mass = 0.0;
        let mut k = 0u32;
        let mut pk = q;
        while mass < 1.0 - TRUNCATION_TAIL && pk > 0.0 {
            table.push((k, pk));
            mass += pk;
            k += 1;
            pk *= 1.0 - q;
        }
        Ok(Self::renormalized(OffspringKind::Geometric(q), table))
    }

    pub fn poisson(mu: f64) -> Result<Self, ModelError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ModelError::BadParameter(format!("poisson mean = {mu}")));
        }
        let mut table = Vec::new();
        let mut mass = 0.0;
        let mut k = 0u32;
        // log-space recursion keeps large means from underflowing at k = 0
        let mut ln_pk = -mu;
        loop {
            let pk = ln_pk.exp();
            if pk > 0.0 {
                table.push((k, pk));
                mass += pk;
            }
            if mass >= 1.0 - TRUNCATION_TAIL && (k as f64) > mu {
                break;
            }
            k += 1;
            ln_pk += mu.ln() - (k as f64).ln();
        }
        Ok(Self::renormalized(OffspringKind::Poisson(mu), table))
    }

    fn renormalized(kind: OffspringKind, mut table: Vec<(u32, f64)>) -> Self {
        let total: f64 = table.iter().map(|&(_, p)| p).sum();
        for (_, p) in &mut table {
            *p /= total;
        }
        Self::from_table(kind, table)
    }

    fn from_table(kind: OffspringKind, table: Vec<(u32, f64)>) -> Self {
        let mean = table.iter().map(|&(k, p)| k as f64 * p).sum();
        OffspringLaw { kind, table, mean }
    }

    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }

    pub fn probabilities(&self) -> &[(u32, f64)] {
        &self.table
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn log_mean(&self) -> f64 {
        self.mean.ln()
    }

    pub fn max_offspring(&self) -> u32 {
        self.table.last().map_or(0, |&(k, _)| k)
    }

    /// `P(B^ = k) = k P(B = k) / E B`; zero-offspring mass drops out.
    pub fn size_biased(&self) -> Vec<(u32, f64)> {
        if self.mean <= 0.0 {
            return Vec::new();
        }
        self.table
            .iter()
            .filter(|&&(k, _)| k > 0)
            .map(|&(k, p)| (k, k as f64 * p / self.mean))
            .collect()
    }

    /// `E[B log^8 B]`; finite for every table-backed law.
    pub fn b_log8_b(&self) -> f64 {
        self.table
            .iter()
            .filter(|&&(k, _)| k > 1)
            .map(|&(k, p)| p * k as f64 * (k as f64).ln().powi(8))
            .sum()
    }

    pub fn require_supercritical(&self) -> Result<(), ModelError> {
        if self.mean > 1.0 {
            Ok(())
        } else {
            Err(ModelError::NotSupercriticalBranching(self.mean))
        }
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            OffspringKind::Constant(k) => write!(f, "const:{k}"),
            OffspringKind::Geometric(q) => write!(f, "geom:{q}"),
            OffspringKind::Poisson(mu) => write!(f, "poisson:{mu}"),
            OffspringKind::Table => {
                f.write_str("table:")?;
                for (i, (k, p)) in self.table.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}:{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// `const:2`, `table:0:0.2,2:0.8`, `geom:0.4`, `poisson:1.5`.
impl FromStr for OffspringLaw {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| ModelError::Syntax(format!("expected kind:params, got {s:?}")))?;
        let number = |t: &str| -> Result<f64, ModelError> {
            t.trim()
                .parse()
                .map_err(|_| ModelError::Syntax(format!("bad number {t:?}")))
        };
        match kind.trim() {
            "const" => rest
                .trim()
                .parse()
                .map(OffspringLaw::constant)
                .map_err(|_| ModelError::Syntax(format!("bad constant {rest:?}"))),
            "geom" => OffspringLaw::geometric(number(rest)?),
            "poisson" => OffspringLaw::poisson(number(rest)?),
            "table" => {
                let mut pairs = Vec::new();
                for item in rest.split(',').map(str::trim) {
                    let (k, p) = item.split_once(':').ok_or_else(|| {
                        ModelError::Syntax(format!("expected count:prob, got {item:?}"))
                    })?;
                    let k: u32 = k
                        .trim()
                        .parse()
                        .map_err(|_| ModelError::Syntax(format!("bad count {k:?}")))?;
                    pairs.push((k, parse_probability(p.trim())?.0));
                }
                OffspringLaw::finite(pairs)
            }
            other => Err(ModelError::Syntax(format!("unknown offspring kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_kinds() {
        assert_eq!("const:2".parse::<OffspringLaw>().unwrap().mean(), 2.0);
        let t: OffspringLaw = "table:0:0.2,2:0.8".parse().unwrap();
        assert!((t.mean() - 1.6).abs() < 1e-15);
        let g: OffspringLaw = "geom:0.4".parse().unwrap();
        assert!((g.mean() - 1.5).abs() < 1e-9);
        let p: OffspringLaw = "poisson:1.5".parse().unwrap();
        assert!((p.mean() - 1.5).abs() < 1e-9);
        assert!("binomial:3".parse::<OffspringLaw>().is_err());
    }

    #[test]
    fn truncated_laws_sum_to_one() {
        for law in [
            OffspringLaw::poisson(1.5).unwrap(),
            OffspringLaw::poisson(40.0).unwrap(),
            OffspringLaw::geometric(0.1).unwrap(),
        ] {
            let total: f64 = law.probabilities().iter().map(|&(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12, "{law}");
            let biased: f64 = law.size_biased().iter().map(|&(_, p)| p).sum();
            assert!((biased - 1.0).abs() < 1e-12, "{law}");
        }
    }

    #[test]
    fn constant_size_biases_to_itself() {
        let law = OffspringLaw::constant(2);
        assert_eq!(law.size_biased(), vec![(2, 1.0)]);
    }

    #[test]
    fn size_biased_table() {
        let law: OffspringLaw = "table:0:0.2,1:0.3,3:0.5".parse().unwrap();
        let biased = law.size_biased();
        let mean = 0.3 + 1.5;
        assert_eq!(biased.len(), 2);
        assert!((biased[0].1 - 0.3 / mean).abs() < 1e-15);
        assert!((biased[1].1 - 1.5 / mean).abs() < 1e-15);
    }

    #[test]
    fn moment_diagnostic() {
        assert_eq!(OffspringLaw::constant(1).b_log8_b(), 0.0);
        let two = OffspringLaw::constant(2).b_log8_b();
        assert!((two - 2.0 * 2f64.ln().powi(8)).abs() < 1e-12);
    }

    #[test]
    fn supercriticality_gate() {
        assert!(OffspringLaw::constant(0).require_supercritical().is_err());
        assert!(OffspringLaw::constant(2).require_supercritical().is_ok());
    }
}
