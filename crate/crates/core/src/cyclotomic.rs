//! Exact values of `Phi_d(2)`, their intrinsic primes and primitive parts.
//!
//! `2^n - 1 = prod_{d | n} Phi_d(2)`. Every prime factor of `Phi_d(2)` has
//! multiplicative order of 2 exactly `d`, except possibly the largest prime
//! factor of `d` (the intrinsic prime). Primitive primes therefore satisfy
//! `p = 1 (mod d)`, which drives the residue-class sieving below.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arithmetic::{divisors, factor_small, moebius, multiplicative_order};
use crate::error::{Error, Result};
use crate::factorization::{factor, Certainty, FactorPolicy, Factorization, Natural};

pub fn mersenne_minus(n: u64) -> Natural {
    (BigUint::one() << n) - 1u32
}

pub fn mersenne_plus(n: u64) -> Natural {
    (BigUint::one() << n) + 1u32
}

/// `Phi_d(2)` as an exact integer, from `prod_{e | d} (2^e - 1)^mu(d/e)`.
pub fn phi2(d: u64) -> Result<Natural> {
    if d == 0 {
        return Err(Error::domain("Phi_0 is undefined"));
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in divisors(d)? {
        match moebius(d / e)? {
            1 => num *= mersenne_minus(e),
            -1 => den *= mersenne_minus(e),
            _ => {}
        }
    }
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "inexact cyclotomic division at d = {d}");
    Ok(q)
}

/// Checks `prod_{d | n} Phi_d(2) = 2^n - 1` exactly.
pub fn product_identity_check(n: u64) -> Result<bool> {
    let mut prod = BigUint::one();
    for d in divisors(n)? {
        prod *= phi2(d)?;
    }
    Ok(prod == mersenne_minus(n))
}

fn largest_prime_factor(d: u64) -> Option<u64> {
    factor_small(d).ok()?.last().map(|&(p, _)| p)
}

/// The largest prime factor of `d` when it divides `Phi_d(2)`.
pub fn intrinsic_prime(d: u64) -> Option<u64> {
    if d <= 1 {
        return None;
    }
    let p = largest_prime_factor(d)?;
    let value = phi2(d).ok()?;
    if !(value % p).is_zero() {
        return None;
    }
    if p > 2 {
        let ord = multiplicative_order(2, p).expect("odd prime");
        let mut q = d / ord;
        assert_eq!(d % ord, 0);
        while q.is_multiple_of(p) {
            q /= p;
        }
        assert_eq!(q, 1, "d / ord_p(2) is not a power of p for d = {d}");
    }
    Some(p)
}

/// `Phi_d(2)` split into its intrinsic prime power and primitive part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicValue {
    pub d: u64,
    pub value: Natural,
    pub intrinsic_prime: Option<u64>,
    /// Exponent of the intrinsic prime in `value` (0 when absent).
    pub intrinsic_multiplicity: u64,
    pub primitive_part: Natural,
}

impl CyclotomicValue {
    pub fn new(d: u64) -> Result<Self> {
        let value = phi2(d)?;
        let intrinsic = intrinsic_prime(d);
        let mut primitive = value.clone();
        let mut mult = 0;
        if let Some(p) = intrinsic {
            while (&primitive % p).is_zero() {
                primitive /= p;
                mult += 1;
            }
        }
        Ok(CyclotomicValue {
            d,
            value,
            intrinsic_prime: intrinsic,
            intrinsic_multiplicity: mult,
            primitive_part: primitive,
        })
    }

    /// Modulus every primitive prime is congruent to 1 against.
    pub fn residue_hint(&self) -> u64 {
        self.d.lcm(&2)
    }

    /// Factors `Phi_d(2)`, sieving the primitive part by residue class.
    pub fn factor(&self, policy: &FactorPolicy) -> Result<Factorization> {
        let mut f = if self.primitive_part.is_one() {
            Factorization::one()
        } else {
            factor(&self.primitive_part, &policy.with_residue_hint(self.residue_hint()))?
        };
        debug_assert!(f
            .primes()
            .all(|p| (p % self.d).to_u64() == Some(1 % self.d)));
        if let Some(p) = self.intrinsic_prime {
            f.insert(BigUint::from(p), self.intrinsic_multiplicity, Certainty::Proven);
        }
        Ok(f)
    }
}

/// `Phi_d(2)` with the intrinsic prime removed to full multiplicity.
pub fn primitive_part(d: u64) -> Result<Natural> {
    Ok(CyclotomicValue::new(d)?.primitive_part)
}

/// Factorization of `Phi_d(2)` under `policy`.
pub fn factor_phi2(d: u64, policy: &FactorPolicy) -> Result<Factorization> {
    CyclotomicValue::new(d)?.factor(policy)
}

/// Witness for a primitive prime divisor of `2^m - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveDivisor {
    /// A prime dividing `2^m - 1` but no earlier `2^l - 1`.
    Prime(Natural),
    /// The primitive part exceeds 1, so such primes exist, but none could be
    /// split off within the policy budget.
    Unsplit(Natural),
}

/// A primitive prime divisor of `2^m - 1`; `None` exactly for `m` in {1, 6}.
pub fn bang_primitive_divisor(m: u64, policy: &FactorPolicy) -> Result<Option<PrimitiveDivisor>> {
    let cv = CyclotomicValue::new(m)?;
    if cv.primitive_part.is_one() {
        return Ok(None);
    }
    let f = factor(&cv.primitive_part, &policy.with_residue_hint(cv.residue_hint()))?;
    let witness = match f.primes().next() {
        Some(p) => PrimitiveDivisor::Prime(p.clone()),
        None => PrimitiveDivisor::Unsplit(cv.primitive_part),
    };
    Ok(Some(witness))
}

/// Number of distinct prime factors of `Phi_d(2)`, exact or a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaPhi2 {
    pub d: u64,
    pub omega: u64,
    pub exact: bool,
}

impl OmegaPhi2 {
    pub fn from_factorization(d: u64, f: &Factorization) -> Self {
        OmegaPhi2 {
            d,
            omega: f.omega_lower_bound(),
            exact: f.is_complete(),
        }
    }

    /// `omega / ln d`; undefined at `d = 1`.
    pub fn ratio(&self) -> Option<f64> {
        (self.d >= 2).then(|| self.omega as f64 / (self.d as f64).ln())
    }
}
