//! Exact rendering and parsing of rationals.

use crate::error::{Error, Result};
use crate::Rat;

/// Fixed-point decimal rendering with round-half-away-from-zero.
pub fn decimal_str(value: &Rat, digits: usize) -> String {
    assert!(digits <= 12, "at most 12 decimal digits supported");
    let negative = value < &Rat::from_integer(0);
    let numer = i128::from(value.numer().unsigned_abs()) * 10i128.pow(digits as u32);
    let denom = i128::from(*value.denom());
    let rounded = (numer + denom / 2) / denom;
    let scale = 10i128.pow(digits as u32);
    let sign = if negative && rounded != 0 { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{rounded}")
    } else {
        format!(
            "{sign}{}.{:0width$}",
            rounded / scale,
            rounded % scale,
            width = digits
        )
    }
}

/// Parses `p/q`, plain integers, and decimal literals into exact rationals.
pub fn parse_ratio(input: &str) -> Result<Rat> {
    let s = input.trim();
    let bad =
        |why: &str| Error::InvalidParameter(format!("cannot parse {input:?} as a rational: {why}"));
    if let Some((numer, denom)) = s.split_once('/') {
        let numer: i64 = numer.trim().parse().map_err(|_| bad("bad numerator"))?;
        let denom: i64 = denom.trim().parse().map_err(|_| bad("bad denominator"))?;
        if denom == 0 {
            return Err(bad("zero denominator"));
        }
        return Ok(Rat::new(numer, denom));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad fractional part"));
        }
        let negative = whole.trim_start().starts_with('-');
        let whole: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().map_err(|_| bad("bad integer part"))?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac: i64 = frac.parse().map_err(|_| bad("bad fractional part"))?;
        let magnitude = Rat::new(whole.abs() * scale + frac, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let value: i64 = s.parse().map_err(|_| bad("not an integer"))?;
    Ok(Rat::from_integer(value))
}
