use std::cmp::Ordering;
use std::fmt;

/// A real number or `+∞`.
///
/// Used for energies of conductivities where the Kirchhoff law has no
/// solution, and for one-sided derivatives that blow up at `C_e = 0`. The
/// infinite case never enters linear algebra as an `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInfinity => None,
        }
    }

    /// Lossy conversion for output only.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInfinity,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInfinity) => Some(Ordering::Less),
            (ExtReal::PosInfinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInfinity, ExtReal::PosInfinity) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::Finite(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInfinity);
        assert_eq!(ExtReal::Finite(1.0).add(ExtReal::PosInfinity), ExtReal::PosInfinity);
        assert_eq!(ExtReal::Finite(1.0).add(2.0.into()), ExtReal::Finite(3.0));
    }
}
