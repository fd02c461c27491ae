// SPDX-License-Identifier: MIT OR Apache-2.0
//! Arbitrary-precision rationals with a strict "num/den" text form.
//!
//! Decimal notation is rejected on input rather than rounded: every
//! probability in the toolkit is an exact rational and equality tests are
//! exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// The probability carrier used everywhere.
pub type Q = BigRational;

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Exact rational from an integer pair. Panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "num/den" or a plain integer. Anything else (decimals in
/// particular) is an error.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational (expected \"num/den\" or integer): {s:?}"));
    let parse_int = |t: &str| -> Result<BigInt> { t.parse::<BigInt>().map_err(|_| bad()) };
    match s.split_once('/') {
        None => Ok(Q::from(parse_int(s)?)),
        Some((n, d)) => {
            let num = parse_int(n)?;
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(num, den))
        }
    }
}

/// Canonical "num/den" form (plain integer when the denominator is 1).
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["0", "1", "-3", "1/2", "-7/3", "27/10"] {
            let v = parse_q(s).unwrap();
            assert_eq!(format_q(&v), s);
        }
    }

    #[test]
    fn parse_reduces() {
        assert_eq!(format_q(&parse_q("2/4").unwrap()), "1/2");
        assert_eq!(format_q(&parse_q("3/-6").unwrap()), "-1/2");
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        for s in ["0.5", "1e-3", "", "1/0", "a/b", "1/2/3"] {
            assert!(parse_q(s).is_err(), "accepted {s:?}");
        }
    }
}
