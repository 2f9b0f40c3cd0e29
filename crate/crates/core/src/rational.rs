//! Exact rational scalars and their text representations.
//!
//! All model data (probabilities, valuations, LP coefficients) is kept as
//! arbitrary-precision rationals so that equivalence decisions never depend
//! on floating-point rounding. Floats appear only in fixed-point iteration
//! and Monte Carlo estimation.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator (guaranteed by the underlying representation).
pub type Rat = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Build a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Build an integral rational.
pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Parse a rational literal: `p/q`, an integer, or a decimal such as
/// `0.35` or `-1.2e-3`. Decimal literals are converted exactly
/// (`0.3` becomes 3/10, not the nearest double).
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_string()))?;
        if d.is_zero() {
            return Err(RatParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rat::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| RatParseError::Invalid(s.to_string()))
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numerator: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().ok()?
    };
    let mut value = Rat::from_integer(numerator * BigInt::from(sign));
    let shift = exp - frac_part.len() as i32;
    let ten = Rat::from_integer(BigInt::from(10));
    let scale = pow_int(&ten, shift.unsigned_abs());
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(value)
}

fn pow_int(base: &Rat, exp: u32) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Render as `p/q`, or just `p` when integral.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double, for display and float-mode evaluation.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a double (doubles are dyadic rationals).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Absolute value.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rat("3/10").unwrap(), rat(3, 10));
        assert_eq!(parse_rat("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert_eq!(parse_rat(" -2 ").unwrap(), rat_int(-2));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rat("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rat("0.35").unwrap(), rat(7, 20));
        assert_eq!(parse_rat("-1.2e-3").unwrap(), rat(-12, 10_000));
        assert_eq!(parse_rat("2.5e2").unwrap(), rat_int(250));
        assert_eq!(parse_rat(".5").unwrap(), rat(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("1.2.3").is_err());
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format_rat(&rat(2, 4)), "1/2");
        assert_eq!(format_rat(&rat_int(5)), "5");
        assert_eq!(format_rat(&rat(-1, 3)), "-1/3");
    }

    #[test]
    fn f64_round_trip_is_exact_for_dyadics() {
        let r = rat_from_f64(0.375).unwrap();
        assert_eq!(r, rat(3, 8));
        assert_eq!(rat_to_f64(&r), 0.375);
    }
}
