//! Decimal rendering of exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// `r` rounded half-to-even at `places` decimals, as (sign, integer, digits).
fn round_half_even(r: &BigRational, places: u32) -> (bool, BigInt, String) {
    let negative = r.is_negative();
    let scale = BigInt::from(10u32).pow(places);
    let num = r.numer().abs() * &scale;
    let den = r.denom().abs();
    let (mut q, rem) = num.div_rem(&den);
    let twice = rem * 2u32;
    if twice > den || (twice == den && q.is_odd()) {
        q += 1u32;
    }
    let (int, frac) = q.div_rem(&scale);
    let digits = if places == 0 {
        String::new()
    } else {
        format!("{:0>width$}", frac.to_string(), width = places as usize)
    };
    (negative && !(int.is_zero() && frac.is_zero()), int, digits)
}

fn assemble(negative: bool, int: BigInt, digits: &str) -> String {
    let sign = if negative { "-" } else { "" };
    if digits.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{digits}")
    }
}

/// Fixed `places` decimals, rounded half-to-even.
pub fn fixed(r: &BigRational, places: u32) -> String {
    let (neg, int, digits) = round_half_even(r, places);
    assemble(neg, int, &digits)
}

/// Table style: values whose decimal expansion ends within four places are
/// written exactly (`2`, `0.5`, `0.25`); everything else is rounded
/// half-to-even to exactly four places (`0.6667`, `0.3810`).
pub fn ratio_4dp(r: &BigRational) -> String {
    let scaled = r * BigRational::from_integer(BigInt::from(10_000u32));
    if scaled.is_integer() {
        let (neg, int, digits) = round_half_even(r, 4);
        assemble(neg, int, digits.trim_end_matches('0'))
    } else {
        fixed(r, 4)
    }
}

/// Up to `places` decimals with trailing zeros removed, keeping at least one
/// decimal digit (`3.0`, `2.333333`).
pub fn trimmed(r: &BigRational, places: u32) -> String {
    let (neg, int, digits) = round_half_even(r, places.max(1));
    let mut d = digits.trim_end_matches('0').to_string();
    if d.is_empty() {
        d.push('0');
    }
    assemble(neg, int, &d)
}

/// `a/b` in lowest terms, or just `a` for integers.
pub fn exact(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `x` to four decimals for irrational table entries.
pub fn real_4dp(x: f64) -> String {
    format!("{x:.4}")
}
