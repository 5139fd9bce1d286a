use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// An exact weight or cost in units of 1/4.
///
/// Every gadget weight in the construction is a multiple of 1/4, so costs are
/// kept as integers and never touch floating point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quarters(pub i64);

impl Quarters {
    pub const ZERO: Quarters = Quarters(0);
    pub const HALF: Quarters = Quarters(2);
    pub const ONE: Quarters = Quarters(4);

    pub const fn whole(units: i64) -> Quarters {
        Quarters(4 * units)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Value as a rational number of whole units.
    pub fn to_ratio(self) -> num_rational::Ratio<i64> {
        num_rational::Ratio::new(self.0, 4)
    }
}

impl fmt::Display for Quarters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / 4;
        match abs % 4 {
            0 => write!(f, "{sign}{whole}"),
            1 => write!(f, "{sign}{whole}.25"),
            2 => write!(f, "{sign}{whole}.5"),
            _ => write!(f, "{sign}{whole}.75"),
        }
    }
}

impl Add for Quarters {
    type Output = Quarters;
    fn add(self, rhs: Quarters) -> Quarters {
        Quarters(self.0 + rhs.0)
    }
}

impl AddAssign for Quarters {
    fn add_assign(&mut self, rhs: Quarters) {
        self.0 += rhs.0;
    }
}

impl Sub for Quarters {
    type Output = Quarters;
    fn sub(self, rhs: Quarters) -> Quarters {
        Quarters(self.0 - rhs.0)
    }
}

impl SubAssign for Quarters {
    fn sub_assign(&mut self, rhs: Quarters) {
        self.0 -= rhs.0;
    }
}

impl Neg for Quarters {
    type Output = Quarters;
    fn neg(self) -> Quarters {
        Quarters(-self.0)
    }
}

impl Mul<i64> for Quarters {
    type Output = Quarters;
    fn mul(self, rhs: i64) -> Quarters {
        Quarters(self.0 * rhs)
    }
}

impl Sum for Quarters {
    fn sum<I: Iterator<Item = Quarters>>(iter: I) -> Quarters {
        iter.fold(Quarters::ZERO, Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_exact_decimal() {
        assert_eq!(Quarters(7).to_string(), "1.75");
        assert_eq!(Quarters(52).to_string(), "13");
        assert_eq!(Quarters(-2).to_string(), "-0.5");
        assert_eq!(Quarters(1836).to_string(), "459");
    }

    #[test]
    fn arithmetic() {
        let w = Quarters(5) + Quarters(5) + Quarters::ONE;
        assert_eq!(w, Quarters(14));
        assert_eq!(w * 3, Quarters(42));
        assert_eq!([Quarters(6), Quarters(6)].into_iter().sum::<Quarters>(), Quarters(12));
    }
}
