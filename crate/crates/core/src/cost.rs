//! Extended-real costs.
//!
//! Lagrangian values and path actions are genuinely infinite at boundary
//! states, so infinity is carried as an explicit variant instead of a float
//! sentinel that would poison quadrature sums.

use std::fmt;
use std::ops::Add;

use serde::ser::Serializer;
use serde::Serialize;

/// A nonnegative extended real: either a finite `f64` or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    /// Finite value, or `None` for `+∞`.
    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    /// Finite value; panics on `+∞`. For tests and call sites that have
    /// already checked finiteness.
    pub fn expect_finite(self) -> f64 {
        match self {
            Cost::Finite(v) => v,
            Cost::Infinite => panic!("cost is infinite"),
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

// JSON cannot represent IEEE infinities; "inf" keeps reports lossless.
impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cost::Finite(v) => serializer.serialize_f64(*v),
            Cost::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_saturates_at_infinity() {
        assert_eq!(Cost::Finite(1.0) + Cost::Finite(2.0), Cost::Finite(3.0));
        assert_eq!(Cost::Finite(1.0) + Cost::Infinite, Cost::Infinite);
        assert!(!(Cost::Infinite + Cost::Infinite).is_finite());
    }

    #[test]
    fn serializes_infinity_as_string() {
        assert_eq!(serde_json::to_string(&Cost::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Cost::Finite(0.5)).unwrap(), "0.5");
    }
}
