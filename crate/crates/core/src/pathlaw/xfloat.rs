use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

const LN_2: f64 = std::f64::consts::LN_2;

/// `2^k` for exponents inside the normal range; zero below it.
#[inline]
pub(crate) fn pow2(k: i64) -> f64 {
    if k < -1022 {
        0.0
    } else if k > 1023 {
        f64::INFINITY
    } else {
        f64::from_bits(((k + 1023) as u64) << 52)
    }
}

/// A nonnegative number `mantissa * 2^exponent` with `mantissa` in `[0.5, 1)`
/// (or exactly zero), so that path probabilities far below `f64::MIN_POSITIVE`
/// keep full relative precision.
#[derive(Clone, Copy, PartialEq)]
pub struct Probability {
    mantissa: f64,
    exponent: i64,
}

impl Probability {
    pub const ZERO: Probability = Probability {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: Probability = Probability {
        mantissa: 0.5,
        exponent: 1,
    };

    #[inline]
    pub(crate) fn from_parts(mantissa: f64, exponent: i64) -> Self {
        if mantissa == 0.0 {
            return Probability::ZERO;
        }
        debug_assert!(mantissa > 0.0 && mantissa.is_finite());
        let mut m = mantissa;
        let mut e = exponent;
        let mut bits = m.to_bits();
        if (bits >> 52) & 0x7ff == 0 {
            m *= pow2(64);
            e -= 64;
            bits = m.to_bits();
        }
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let normalized = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
        Probability {
            mantissa: normalized,
            exponent: e + biased - 1022,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "probability must be finite and nonnegative");
        Probability::from_parts(x, 0)
    }

    /// `e^{ln}`, without underflow.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            return Probability::ZERO;
        }
        let k = (ln / LN_2).floor();
        let rest = ln - k * LN_2;
        Probability::from_parts(rest.exp(), k as i64)
    }

    #[inline]
    pub(crate) fn mantissa(self) -> f64 {
        self.mantissa
    }

    #[inline]
    pub(crate) fn exponent(self) -> i64 {
        self.exponent
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    /// The value as an `f64`; underflows to zero below the subnormal range.
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        if self.exponent < -1022 {
            // split the scaling so subnormal results round once
            let head = pow2(-1022);
            let tail = self.exponent + 1022;
            if tail < -60 {
                return 0.0;
            }
            return self.mantissa * pow2(tail) * head;
        }
        self.mantissa * pow2(self.exponent)
    }

    pub fn ln(self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.ln() + self.exponent as f64 * LN_2
        }
    }

    pub fn log10(self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    pub fn mul(self, other: Probability) -> Probability {
        Probability::from_parts(
            self.mantissa * other.mantissa,
            self.exponent + other.exponent,
        )
    }

    pub fn scale(self, factor: f64) -> Probability {
        Probability::from_parts(self.mantissa * factor, self.exponent)
    }

    /// `self / other` as an `f64`.
    pub fn ratio(self, other: Probability) -> f64 {
        if other.is_zero() {
            return if self.is_zero() { f64::NAN } else { f64::INFINITY };
        }
        let shift = self.exponent - other.exponent;
        let q = self.mantissa / other.mantissa;
        if shift < -1100 {
            0.0
        } else if shift > 1100 {
            f64::INFINITY
        } else {
            q * 2f64.powi(shift as i32)
        }
    }

    /// `|self - other| / other`.
    pub fn relative_difference(self, other: Probability) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        (self.ratio(other) - 1.0).abs()
    }

    pub fn sum(items: impl IntoIterator<Item = Probability>) -> Probability {
        let mut acc = Accumulator::default();
        for p in items {
            acc.add(p.mantissa, p.exponent);
        }
        acc.finish()
    }
}

impl PartialOrd for Probability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => Some(
                self.exponent
                    .cmp(&other.exponent)
                    .then(self.mantissa.partial_cmp(&other.mantissa)?),
            ),
        }
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probability({})", self)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v != 0.0 || self.is_zero() {
            return write!(f, "{v:e}");
        }
        let l10 = self.log10();
        let e = l10.floor();
        write!(f, "{}e{}", 10f64.powf(l10 - e), e as i64)
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// Neumaier-compensated sum of extended-exponent terms sharing a running exponent.
#[derive(Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
    exponent: i64,
    live: bool,
}

impl Accumulator {
    #[inline]
    pub(crate) fn add(&mut self, mantissa: f64, exponent: i64) {
        if mantissa == 0.0 {
            return;
        }
        if !self.live {
            self.sum = mantissa;
            self.comp = 0.0;
            self.exponent = exponent;
            self.live = true;
            return;
        }
        let term = if exponent > self.exponent {
            let s = pow2(self.exponent - exponent);
            self.sum *= s;
            self.comp *= s;
            self.exponent = exponent;
            mantissa
        } else {
            mantissa * pow2(exponent - self.exponent)
        };
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
        // keep the running mantissa away from overflow
        if self.sum > 1e300 {
            self.sum *= pow2(-512);
            self.comp *= pow2(-512);
            self.exponent += 512;
        }
    }

    #[inline]
    pub(crate) fn finish(self) -> Probability {
        if !self.live {
            return Probability::ZERO;
        }
        let total = self.sum + self.comp;
        if total <= 0.0 {
            return Probability::ZERO;
        }
        Probability::from_parts(total, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roundtrips_ordinary_values() {
        for x in [1.0, 0.5, 0.0625, 1e-300, 3.7e-12, 0.999999] {
            assert_eq!(Probability::from_f64(x).value(), x);
        }
        assert_eq!(Probability::ONE.value(), 1.0);
        assert_eq!(Probability::ZERO.value(), 0.0);
    }

    #[test]
    fn handles_subnormal_inputs() {
        let tiny = f64::MIN_POSITIVE / 8.0;
        let p = Probability::from_f64(tiny);
        assert_eq!(p.value(), tiny);
    }

    #[test]
    fn far_below_f64_range() {
        let p = Probability::from_ln(-2000.0 * LN_2);
        assert_eq!(p.value(), 0.0);
        assert!((p.ln() + 2000.0 * LN_2).abs() < 1e-10);
        let q = p.mul(Probability::from_ln(1990.0 * LN_2));
        assert!((q.value() - 2f64.powi(-10)).abs() < 1e-25);
        assert!(p.to_string().contains("e-603"));
    }

    #[test]
    fn accumulator_mixes_exponents() {
        let big = Probability::from_f64(1.0);
        let small = Probability::from_ln(-5000.0);
        let s = Probability::sum([small, big, small]);
        assert_eq!(s.value(), 1.0);
        let s = Probability::sum([small, small]);
        assert!((s.ln() - (-5000.0 + 2f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn compensation_recovers_cancelled_digits() {
        let mut terms = vec![Probability::from_f64(1.0)];
        terms.extend(std::iter::repeat(Probability::from_f64(1e-17)).take(1000));
        let s = Probability::sum(terms);
        assert!((s.value() - (1.0 + 1e-14)).abs() < 1e-28);
    }

    proptest! {
        #[test]
        fn ratio_matches_ln_difference(a in -3000.0f64..0.0, b in -3000.0f64..0.0) {
            let pa = Probability::from_ln(a);
            let pb = Probability::from_ln(b);
            prop_assert!((pa.ln() - a).abs() < 1e-12 * a.abs().max(1.0));
            if (a - b).abs() < 600.0 {
                let r = pa.ratio(pb);
                prop_assert!((r.ln() - (a - b)).abs() < 1e-9);
            }
            if (a - b).abs() > 1e-9 {
                prop_assert_eq!(pa < pb, a < b);
            }
        }
    }
}
