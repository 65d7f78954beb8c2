//! Exact text renderings used in reports.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serializer;

/// Digits after the decimal point in rendered decimals.
pub const DECIMAL_PLACES: u32 = 12;

/// `num/den` in lowest terms, always with a denominator.
pub fn rational_text(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn serialize_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&rational_text(r))
}

pub fn serialize_opt_rational<S: Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => serialize_rational(r, s),
        None => s.serialize_none(),
    }
}

/// Truncated decimal expansion of `r` with [`DECIMAL_PLACES`] digits.
pub fn decimal_text(r: &BigRational) -> String {
    let scale = BigInt::from(10u32).pow(DECIMAL_PLACES);
    let scaled = (r.numer().abs() * scale) / r.denom();
    fixed_point(r.is_negative(), scaled.magnitude())
}

/// Truncated decimal expansion of `|x| / q^(e + 1/2)`, computed with
/// integer square roots only.
pub fn normalized_text(x: &BigRational, q: u64, e: u32) -> String {
    // floor(sqrt(y)) == isqrt(floor(y)) for y >= 0
    let scale = BigUint::from(10u32).pow(2 * DECIMAL_PLACES);
    let num = x.numer().magnitude() * x.numer().magnitude() * scale;
    let den = x.denom().magnitude() * x.denom().magnitude() * BigUint::from(q).pow(2 * e + 1);
    fixed_point(false, &num.div_floor(&den).sqrt())
}

fn fixed_point(negative: bool, scaled: &BigUint) -> String {
    let digits = scaled.to_str_radix(10);
    let places = DECIMAL_PLACES as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    let sign = if negative && scaled.to_u64() != Some(0) {
        "-"
    } else {
        ""
    };
    format!("{sign}{int}.{frac}")
}
