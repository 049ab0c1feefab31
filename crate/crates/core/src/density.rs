use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// An exact nonnegative rational, kept in lowest terms. Serialises as
/// `{"num": …, "den": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Density {
    pub num: u128,
    pub den: u128,
}

impl Density {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }
}

impl PartialOrd for Density {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Density {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // both sides below 2^128, so compare the 256-bit cross products
        let lhs = wide_mul(self.num, other.den);
        let rhs = wide_mul(other.num, self.den);
        lhs.cmp(&rhs)
    }
}

fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    let mask = u64::MAX as u128;
    let (a_hi, a_lo) = (a >> 64, a & mask);
    let (b_hi, b_lo) = (b >> 64, b & mask);
    let lo_lo = a_lo * b_lo;
    let hi_lo = a_hi * b_lo;
    let lo_hi = a_lo * b_hi;
    let hi_hi = a_hi * b_hi;
    let mid = (lo_lo >> 64) + (hi_lo & mask) + (lo_hi & mask);
    let low = (mid << 64) | (lo_lo & mask);
    let high = hi_hi + (hi_lo >> 64) + (lo_hi >> 64) + (mid >> 64);
    (high, low)
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_orders() {
        assert_eq!(Density::new(4, 8), Density::new(1, 2));
        assert_eq!(Density::new(0, 8), Density::new(0, 1));
        assert!(Density::new(1, 4) < Density::new(1, 2));
        let big = Density::new(u128::MAX - 1, u128::MAX);
        assert!(big < Density::new(1, 1));
        assert!(Density::new(3, 1 << 100) > Density::new(1, 1 << 100));
        assert_eq!(Density::new(1, 2).to_string(), "1/2");
    }
}
