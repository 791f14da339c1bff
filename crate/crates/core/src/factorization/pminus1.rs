//! Pollard's p-1 method, stage 1.
//!
//! Primitive divisors of `2^d - 1` satisfy `p = 1 (mod d)`, so the residue
//! hint from the policy is folded into the exponent up front.

use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::montgomery::{biguint_of, Montgomery, Residue};
use super::FactorPolicy;
use crate::arithmetic::prime_table;

/// Primes processed between gcd checkpoints.
const CHECKPOINT_EVERY: usize = 64;

// Base 2 is useless here: it has order exactly d modulo every primitive prime
// of the d-th cyclotomic value, so all of them would surface together.
const BASES: [u32; 3] = [3, 5, 7];

enum Attempt {
    Found(BigUint),
    Collapsed,
    Exhausted,
}

/// Finds a nontrivial divisor of the odd composite `n` whose `p - 1` is
/// `p_minus_1_bound`-smooth (times the residue hint), or `None`.
pub fn pollard_p_minus_1(n: &BigUint, policy: &FactorPolicy) -> Option<BigUint> {
    pollard_p_minus_1_until(n, policy, policy.deadline())
}

pub(crate) fn pollard_p_minus_1_until(
    n: &BigUint,
    policy: &FactorPolicy,
    deadline: Option<Instant>,
) -> Option<BigUint> {
    assert!(n.bit(0) && n > &BigUint::from(8u32), "p-1 needs an odd n >= 9");
    let bound = policy.p_minus_1_bound;
    if bound < 2 {
        return None;
    }
    let ctx = Montgomery::new(n);
    let table = prime_table(bound);
    let primes = table.primes_up_to(bound);

    for base in BASES {
        let g = BigUint::from(base).gcd(n);
        if !g.is_one() {
            return Some(g);
        }
        let mut a = ctx.to_mont(&BigUint::from(base));
        if let Some(m) = policy.residue_modulus.filter(|&m| m > 1) {
            a = ctx.pow_u64(&a, m);
        }
        match stage_one(&ctx, a.clone(), primes, bound, deadline) {
            Attempt::Found(g) => return Some(g),
            Attempt::Exhausted => return None,
            Attempt::Collapsed => {
                // Every factor appeared at the same prime; largest primes first
                // tends to separate them.
                let mut rev: Vec<u64> = primes.to_vec();
                rev.reverse();
                if let Some(g) = fine_steps(&ctx, a, &rev, bound) {
                    return Some(g);
                }
            }
        }
    }
    None
}

fn prime_power_below(p: u64, bound: u64) -> u64 {
    let mut pe = p;
    while pe <= bound / p {
        pe *= p;
    }
    pe
}

fn gcd_minus_one(ctx: &Montgomery, a: &Residue) -> BigUint {
    let mut diff = ctx.zero();
    ctx.sub(a, &ctx.one(), &mut diff);
    biguint_of(&diff).gcd(ctx.modulus())
}

fn stage_one(
    ctx: &Montgomery,
    mut a: Residue,
    primes: &[u64],
    bound: u64,
    deadline: Option<Instant>,
) -> Attempt {
    let n = ctx.modulus();
    let g = gcd_minus_one(ctx, &a);
    if !g.is_one() {
        return if &g == n { Attempt::Collapsed } else { Attempt::Found(g) };
    }
    for chunk in primes.chunks(CHECKPOINT_EVERY) {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Attempt::Exhausted;
        }
        let checkpoint = a.clone();
        for &p in chunk {
            a = ctx.pow_u64(&a, prime_power_below(p, bound));
        }
        let g = gcd_minus_one(ctx, &a);
        if g.is_one() {
            continue;
        }
        if &g != n {
            return Attempt::Found(g);
        }
        return match fine_steps(ctx, checkpoint, chunk, bound) {
            Some(g) => Attempt::Found(g),
            None => Attempt::Collapsed,
        };
    }
    Attempt::Exhausted
}

/// Raises `a` one prime at a time, checking the gcd after every step.
fn fine_steps(ctx: &Montgomery, mut a: Residue, primes: &[u64], bound: u64) -> Option<BigUint> {
    let n = ctx.modulus();
    for &p in primes {
        let mut pe = 1;
        while pe <= bound / p {
            pe *= p;
            a = ctx.pow_u64(&a, p);
            let g = gcd_minus_one(ctx, &a);
            if g.is_one() {
                continue;
            }
            return if &g == n { None } else { Some(g) };
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_bound(bound: u64) -> FactorPolicy {
        FactorPolicy { p_minus_1_bound: bound, ..FactorPolicy::default() }
    }

    #[test]
    fn finds_23_in_2047() {
        assert_eq!(
            pollard_p_minus_1(&BigUint::from(2047u32), &with_bound(11)),
            Some(BigUint::from(23u32))
        );
        assert_eq!(
            pollard_p_minus_1(&BigUint::from(2047u32), &with_bound(100_000)),
            Some(BigUint::from(23u32))
        );
    }

    #[test]
    fn fifteen() {
        let g = pollard_p_minus_1(&BigUint::from(15u32), &FactorPolicy::default()).unwrap();
        assert!(g == BigUint::from(3u32) || g == BigUint::from(5u32));
    }

    #[test]
    fn bound_two_is_exhausted() {
        assert_eq!(pollard_p_minus_1(&BigUint::from(2047u32), &with_bound(2)), None);
    }

    #[test]
    fn residue_hint_reaches_large_smooth_factor() {
        // 2^67 - 1 = 193707721 * 761838257287; 193707721 - 1 = 2^3 * 3^3 * 5 * 67 * 2677.
        let n = (BigUint::from(1u32) << 67) - 1u32;
        let policy = FactorPolicy {
            p_minus_1_bound: 3000,
            residue_modulus: Some(134),
            ..FactorPolicy::default()
        };
        assert_eq!(pollard_p_minus_1(&n, &policy), Some(BigUint::from(193_707_721u64)));
    }
}
