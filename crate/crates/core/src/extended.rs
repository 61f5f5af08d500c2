//! Extended real numbers.
//!
//! Growth rates, relative rates of return and exponential moments of Lévy
//! laws can legitimately be `+∞` or `−∞`. Those values are carried as tags
//! rather than as IEEE infinities so that callers must handle them.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps IEEE infinities onto the tags. NaN is not accepted.
    pub fn from_f64(x: f64) -> ExtReal {
        debug_assert!(!x.is_nan());
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Lossy conversion back to `f64` for reporting and ordering.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    /// Adds a finite amount.
    pub fn shift(self, dx: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x + dx),
            other => other,
        }
    }

    pub fn scale(self, k: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x * k),
            _ if k == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf if k > 0.0 => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::NegInf if k > 0.0 => ExtReal::NegInf,
            ExtReal::NegInf => ExtReal::PosInf,
        }
    }

    /// Sum of extended reals. `+∞ + −∞` has no value and yields `None`.
    pub fn checked_add(self, other: ExtReal) -> Option<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    /// Panics on `+∞ + −∞`; use [`ExtReal::checked_add`] when both signs can occur.
    fn add(self, rhs: ExtReal) -> ExtReal {
        self.checked_add(rhs).expect("indeterminate +inf + -inf")
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        self.scale(-1.0)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "+inf"),
            ExtReal::NegInf => write!(f, "-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_respects_tags() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.scale(-2.0), ExtReal::NegInf);
        assert_eq!(ExtReal::NegInf.scale(0.0), ExtReal::ZERO);
        assert!(ExtReal::PosInf.checked_add(ExtReal::NegInf).is_none());
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
    }

    #[test]
    fn serde_shape() {
        let s = serde_json::to_string(&ExtReal::Finite(0.5)).unwrap();
        assert_eq!(s, r#"{"finite":0.5}"#);
        assert_eq!(serde_json::to_string(&ExtReal::PosInf).unwrap(), r#""posInf""#);
    }
}
