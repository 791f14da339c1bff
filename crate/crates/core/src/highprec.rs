//! Binary fixed-point logarithms carried to 320 bits (about 96 digits).

use std::sync::LazyLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits of every [`Fixed`] value.
pub const FRAC_BITS: u64 = 320;

/// A real number `raw / 2^FRAC_BITS`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(pub BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Fixed(v.into() << FRAC_BITS)
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }

    pub fn mul_int(&self, k: impl Into<BigInt>) -> Fixed {
        Fixed(&self.0 * k.into())
    }

    pub fn div_int(&self, k: impl Into<BigInt>) -> Fixed {
        Fixed(self.0.div_floor(&k.into()))
    }

    pub fn abs(&self) -> Fixed {
        Fixed(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        let top = (&self.0 >> (FRAC_BITS - 60)).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(-60)
    }

    /// Decimal expansion truncated towards zero after `digits` places.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.0.is_negative();
        let mag = self.0.abs();
        let int = &mag >> FRAC_BITS;
        let frac = &mag - (&int << FRAC_BITS);
        let scaled: BigInt = (frac * BigInt::from(10u32).pow(digits as u32)) >> FRAC_BITS;
        let body = format!("{int}.{:0>digits$}", scaled.to_string());
        if neg { format!("-{body}") } else { body }
    }
}

/// `atanh(y)` for fixed `0 <= y <= 1/3`.
fn atanh(y: &BigInt) -> BigInt {
    let y2 = (y * y) >> FRAC_BITS;
    let mut term = y.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !term.is_zero() {
        sum += &term / k;
        term = (&term * &y2) >> FRAC_BITS;
        k += 2;
    }
    sum
}

static LN2: LazyLock<Fixed> = LazyLock::new(|| {
    let third = (BigInt::one() << FRAC_BITS) / 3;
    Fixed(atanh(&third) * 2)
});

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2() -> Fixed {
    LN2.clone()
}

/// `ln x` for an integer `x >= 1`, via `x = 2^(b-1) m` with `1 <= m < 2`.
pub fn ln_natural(x: &BigUint) -> Fixed {
    assert!(!x.is_zero(), "ln 0");
    let b = x.bits();
    let one = BigInt::one() << FRAC_BITS;
    let m = if b - 1 > FRAC_BITS {
        BigInt::from(x >> (b - 1 - FRAC_BITS))
    } else {
        BigInt::from(x << (FRAC_BITS - (b - 1)))
    };
    let y = ((&m - &one) << FRAC_BITS) / (&m + &one);
    Fixed(atanh(&y) * 2).add(&ln2().mul_int(b - 1))
}

/// `ln(1 - 2^-k)` from `-sum_j 2^(-jk) / j`.
pub fn ln_one_minus_pow2(k: u64) -> Fixed {
    assert!(k >= 1);
    let mut sum = BigInt::zero();
    let mut j = 1u64;
    while j * k <= FRAC_BITS {
        sum -= (BigInt::one() << (FRAC_BITS - j * k)) / j;
        j += 1;
    }
    Fixed(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_digits() {
        assert_eq!(
            ln2().to_decimal(50),
            "0.69314718055994530941723212145817656807550013436025"
        );
    }

    #[test]
    fn ln_small_values() {
        assert_eq!(ln_natural(&BigUint::one()), Fixed::zero());
        assert!((ln_natural(&BigUint::from(10u32)).to_f64() - 10f64.ln()).abs() < 1e-15);
        assert!((ln_natural(&BigUint::from(1023u32)).to_f64() - 1023f64.ln()).abs() < 1e-13);
        assert_eq!(
            ln_natural(&BigUint::from(3u32)).to_decimal(30),
            "1.098612288668109691395245236922"
        );
    }

    #[test]
    fn two_routes_agree() {
        for k in [1u64, 2, 5, 64, 200, 400] {
            let direct = ln_natural(&((BigUint::one() << k) - 1u32));
            let series = ln2().mul_int(k).add(&ln_one_minus_pow2(k));
            assert!(direct.sub(&series).abs().0.bits() < 16, "k = {k}");
        }
    }

    #[test]
    fn negative_rendering() {
        let v = ln_one_minus_pow2(1);
        assert!(v.to_decimal(10).starts_with("-0.6931471805"));
    }
}
