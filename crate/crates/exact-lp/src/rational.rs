//! Exact rational numbers and their textual forms.
//!
//! Every quantity in the LP layer is a [`Rational`]. The textual form used in
//! files is `"p"` for integers and `"p/q"` otherwise; decimal literals such as
//! `"2.5"` are accepted on input and converted without rounding.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

fn parse_err(literal: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError { literal: literal.to_string(), reason }
}

fn parse_int(s: &str, full: &str) -> Result<BigInt, ParseRationalError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(full, "expected an integer"));
    }
    s.parse::<BigInt>().map_err(|_| parse_err(full, "expected an integer"))
}

/// Parses `"7"`, `"-3"`, `"5/2"` or `"2.125"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(parse_err(text, "empty literal"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num.trim(), text)?;
        let den = parse_int(den.trim(), text)?;
        if den.is_zero() {
            return Err(parse_err(text, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_err(text, "malformed decimal"));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['+', '-']);
        let whole = if int_digits.is_empty() { BigInt::zero() } else { parse_int(int_digits, text)? };
        let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let frac: BigInt = frac_part.parse().map_err(|_| parse_err(text, "malformed decimal"))?;
        let mut value = Rational::new(whole * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    Ok(Rational::from_integer(parse_int(s, text)?))
}

/// Formats as `"p"` when integral, `"p/q"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_nonnegative(v: &Rational) -> bool {
    !v.is_negative()
}
