//! Helpers for arbitrary-precision rational numbers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// The exact scalar type used throughout the crate.
pub type Rational = BigRational;

/// Builds a rational from an integer numerator and denominator.
///
/// # Panics
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses a rational from a string of the form `"p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|e| format!("invalid numerator {num:?}: {e}"))?;
    let den: BigInt = den
        .parse()
        .map_err(|e| format!("invalid denominator {den:?}: {e}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Formats a rational as `"p"` or `"p/q"` in lowest terms.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floor of a rational as a `BigInt`.
pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Floor of a rational as an `i64` (panics on overflow; values in this crate
/// stay tiny).
pub fn floor_i64(r: &Rational) -> i64 {
    use num_traits::ToPrimitive;
    floor_int(r)
        .to_i64()
        .expect("rational floor out of i64 range")
}

/// Returns the absolute value.
pub fn abs(r: &Rational) -> Rational {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "3", "-2", "1/2", "-7/3"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        assert_eq!(rational_to_string(&parse_rational("2/4").unwrap()), "1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn floor_works_on_negatives() {
        assert_eq!(floor_i64(&rat(-1, 2)), -1);
        assert_eq!(floor_i64(&rat(3, 2)), 1);
        assert_eq!(floor_i64(&rat(-4, 2)), -2);
    }
}
