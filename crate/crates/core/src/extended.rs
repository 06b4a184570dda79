//! Extended reals used for bounds, bound gaps and maximal stepsizes.

use std::cmp::Ordering;
use std::fmt;

/// A value of `ℝ ∪ {−∞, +∞}`.
///
/// The derived ordering places `NegInf` below every finite value and `PosInf`
/// above, so `min`/`max` behave as on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps IEEE infinities onto the tagged variants. NaN is rejected.
    pub fn from_f64(v: f64) -> Option<Self> {
        if v.is_nan() {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion for reporting only.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Greater) => other,
            _ => self,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Less) => other,
            _ => self,
        }
    }

    /// Multiplication by a strictly positive finite scalar.
    pub fn scale(self, s: f64) -> Self {
        debug_assert!(s > 0.0 && s.is_finite());
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * s),
            other => other,
        }
    }

    /// `self − x` for a finite `x`.
    pub fn minus(self, x: f64) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v - x),
            other => other,
        }
    }

    /// `x − self` for a finite `x`.
    pub fn subtracted_from(self, x: f64) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(x - v),
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }

    /// Compare against a finite value.
    pub fn lt_f64(self, x: f64) -> bool {
        self < ExtReal::Finite(x)
    }

    pub fn gt_f64(self, x: f64) -> bool {
        self > ExtReal::Finite(x)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("NaN is not an extended real")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_on_extended_line() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(2.0).min(ExtReal::PosInf), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::NegInf.max(ExtReal::Finite(0.0)), ExtReal::Finite(0.0));
    }

    #[test]
    fn arithmetic_keeps_infinities() {
        assert_eq!(ExtReal::PosInf.minus(3.0), ExtReal::PosInf);
        assert_eq!(ExtReal::NegInf.subtracted_from(3.0), ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(1.0).subtracted_from(3.0), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::PosInf.scale(0.5), ExtReal::PosInf);
        assert_eq!(ExtReal::from(f64::NEG_INFINITY), ExtReal::NegInf);
        assert!(ExtReal::from_f64(f64::NAN).is_none());
    }
}
