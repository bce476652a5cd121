//! Exact rational scalars. Every coefficient in the engine is a `Scalar`;
//! no floating point is used anywhere, so equality of expressions is
//! structural equality of canonical forms.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by `BigRational`).
pub type Scalar = BigRational;

pub fn s_int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn s_ratio(p: i64, q: i64) -> Scalar {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn s_zero() -> Scalar {
    BigRational::zero()
}

pub fn s_one() -> Scalar {
    BigRational::one()
}

/// Parses "p/q" or a bare integer "p". Whitespace is not accepted.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let mk_err = || Error::Parse(format!("invalid rational literal {text:?}"));
    match text.split_once('/') {
        None => {
            let p: BigInt = text.parse().map_err(|_| mk_err())?;
            Ok(BigRational::from_integer(p))
        }
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| mk_err())?;
            let q: BigInt = q.parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(BigRational::new(p, q))
        }
    }
}

/// Renders always as "p/q" (so "5" becomes "5/1"); the uniform shape keeps
/// report output byte-stable.
pub fn format_scalar(s: &Scalar) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

/// Human-oriented rendering: integers without the "/1" tail, a leading sign
/// handled by the caller when needed.
pub fn display_scalar(s: &Scalar) -> String {
    if s.denom().is_one() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

pub fn is_negative(s: &Scalar) -> bool {
    s.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        assert_eq!(parse_scalar("3/4").unwrap(), s_ratio(3, 4));
        assert_eq!(parse_scalar("-6/8").unwrap(), s_ratio(-3, 4));
        assert_eq!(parse_scalar("5").unwrap(), s_int(5));
        assert_eq!(format_scalar(&s_int(5)), "5/1");
        assert_eq!(format_scalar(&s_ratio(-3, 4)), "-3/4");
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("a/b").is_err());
    }

    #[test]
    fn lowest_terms_negative_denominator() {
        let s = parse_scalar("2/-4").unwrap();
        assert_eq!(s, s_ratio(-1, 2));
        assert_eq!(format_scalar(&s), "-1/2");
    }
}
