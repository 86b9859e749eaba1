//! Helpers for arbitrary-precision rationals: construction, exact text form,
//! conversion to floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::pwlin::PwlinError;

/// Build a rational from a small numerator/denominator pair.
///
/// Panics on a zero denominator, like `BigRational::new`.
pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Render a rational as `p/q` with the denominator always explicit.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p/q` or a bare integer `p` into an exact rational.
///
/// Decimal literals are rejected: exactness claims must not be laundered
/// through floating point.
pub fn parse_rational(s: &str) -> Result<BigRational, PwlinError> {
    let s = s.trim();
    let err = |msg: String| PwlinError::Parse { line: 0, msg };
    if s.contains(['.', 'e', 'E']) {
        return Err(err(format!(
            "`{s}` looks like a decimal literal; write an exact fraction p/q"
        )));
    }
    let mut parts = s.splitn(2, '/');
    let numer: BigInt = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|e| err(format!("bad numerator in `{s}`: {e}")))?;
    let denom: BigInt = match parts.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|e| err(format!("bad denominator in `{s}`: {e}")))?,
        None => BigInt::from(1),
    };
    if denom == BigInt::from(0) {
        return Err(err(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(numer, denom))
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational magnitude representable as f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0/9"] {
            let r = parse_rational(s).unwrap();
            let back = parse_rational(&rational_string(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(rational_string(&rational(-6, 4)), "-3/2");
    }

    #[test]
    fn rejects_decimals_and_zero_denominators() {
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("3/0").is_err());
    }
}
