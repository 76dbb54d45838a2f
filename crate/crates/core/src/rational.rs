//! Exact rational arithmetic helpers.
//!
//! All exponents, arc endpoints and derived constants in this crate are
//! carried as `BigRational` (arbitrary precision, always in lowest terms with
//! positive denominator) and only turned into floating point at the last
//! moment. The helpers here cover the two conversions we need constantly:
//! parsing user input ("a/b", integers, or decimals) and raising a float to a
//! rational power.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

/// Parse a rational from "a/b", a plain integer, or a decimal string.
///
/// Returns the value together with an `exact` flag: "a/b" and integers are
/// exact; decimals are parsed exactly as written (e.g. "0.26" -> 26/100 in
/// lowest terms) but flagged inexact, since a decimal is usually a rounded
/// stand-in for something else.
pub fn parse_ratio(s: &str) -> Result<(BigRational, bool)> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok((BigRational::new(n, d), true));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.trim();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidInput(format!("bad decimal {s:?}")));
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_part = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad decimal {s:?}")))?
        };
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac: BigInt = digits
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad decimal {s:?}")))?;
        let abs = BigRational::from(int_part.abs()) + BigRational::new(frac, scale);
        let v = if negative { -abs } else { abs };
        return Ok((v, false));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a rational: {s:?}")))?;
    Ok((BigRational::from(n), true))
}

/// Format as "num/den" (or just "num" when the denominator is 1).
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact conversion of a finite f64 into the dyadic rational it denotes.
pub fn ratio_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// base^exp with a rational exponent, evaluated in doubles at the end.
pub fn pow_ratio(base: f64, exp: &BigRational) -> f64 {
    base.powf(ratio_to_f64(exp))
}

/// Round-to-nearest double of a rational.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Torus distance ||r|| = min(frac, 1 - frac) of a rational, exactly.
pub fn torus_norm(r: &BigRational) -> BigRational {
    let one = BigRational::from(BigInt::from(1));
    let mut f = r - r.floor();
    if f > &one - &f {
        f = &one - &f;
    }
    f
}
