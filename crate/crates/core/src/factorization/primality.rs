use num_bigint::{BigUint, RandBigInt};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::montgomery::Montgomery;
use super::FactorPolicy;

/// Outcome of a primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primality {
    Prime,
    ProbablePrime,
    /// Composite, or one of 0 and 1.
    Composite,
}

impl Primality {
    pub fn is_prime_like(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

/// The first thirteen primes as Miller-Rabin witnesses.
const FIXED_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Every composite below this bound fails Miller-Rabin for one of `FIXED_BASES`
/// (Sorenson and Webster, 2015).
pub const DETERMINISTIC_BOUND: u128 = 3_317_044_064_679_887_385_961_981;

/// Primality verdict for `n`.
///
/// Below [`DETERMINISTIC_BOUND`] the verdict is exact. Above it, `n` must also
/// survive `policy.mr_rounds` seeded random bases and is reported as
/// [`Primality::ProbablePrime`].
pub fn is_probable_prime(n: &BigUint, policy: &FactorPolicy) -> Primality {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return Primality::Composite;
        }
        for &p in &FIXED_BASES {
            if small == p {
                return Primality::Prime;
            }
            if small % p == 0 {
                return Primality::Composite;
            }
        }
        if small < 41 * 41 {
            return Primality::Prime;
        }
    } else if !n.bit(0) {
        return Primality::Composite;
    } else {
        for &p in &FIXED_BASES[1..] {
            if (n % p).to_u64() == Some(0) {
                return Primality::Composite;
            }
        }
    }

    let ctx = Montgomery::new(n);
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let minus_one = {
        let mut out = ctx.zero();
        ctx.sub(&ctx.zero(), &ctx.one(), &mut out);
        out
    };

    let strong_probable_prime = |base: &BigUint| -> bool {
        let b = ctx.to_mont(base);
        let mut x = ctx.pow(&b, &d);
        if x == ctx.one() || x == minus_one {
            return true;
        }
        let mut tmp = ctx.zero();
        for _ in 1..s {
            ctx.square(&x, &mut tmp);
            std::mem::swap(&mut x, &mut tmp);
            if x == minus_one {
                return true;
            }
            if x == ctx.one() {
                return false;
            }
        }
        false
    };

    for &b in &FIXED_BASES {
        if !strong_probable_prime(&BigUint::from(b)) {
            return Primality::Composite;
        }
    }
    if n.to_u128().is_some_and(|v| v < DETERMINISTIC_BOUND) {
        return Primality::Prime;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(policy.rng_seed);
    let two = BigUint::from(2u32);
    for _ in 0..policy.mr_rounds {
        let base = rng.gen_biguint_range(&two, &n_minus_1);
        if !strong_probable_prime(&base) {
            return Primality::Composite;
        }
    }
    Primality::ProbablePrime
}

pub fn is_prime_u64(n: u64) -> bool {
    is_probable_prime(&BigUint::from(n), &FactorPolicy::default()) == Primality::Prime
}
