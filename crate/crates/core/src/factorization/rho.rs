//! Pollard rho with Brent's cycle detection and batched gcds.

use std::time::Instant;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::montgomery::{biguint_of, Montgomery, Residue};
use super::FactorPolicy;

/// Products of differences accumulated between gcd evaluations.
const BATCH: u64 = 128;

enum Walk {
    Found(BigUint),
    /// The sequence closed its cycle modulo every factor at once.
    Degenerate,
    Exhausted,
}

/// Finds a nontrivial divisor of the odd composite `n`, or `None` once
/// `policy.rho_budget` iterations (or the time budget) are spent.
///
/// Deterministic for a fixed `policy.rng_seed`.
pub fn pollard_rho(n: &BigUint, policy: &FactorPolicy) -> Option<BigUint> {
    pollard_rho_until(n, policy, policy.deadline())
}

pub(crate) fn pollard_rho_until(
    n: &BigUint,
    policy: &FactorPolicy,
    deadline: Option<Instant>,
) -> Option<BigUint> {
    assert!(n.bit(0) && n > &BigUint::from(8u32), "pollard_rho needs an odd n >= 9");
    let ctx = Montgomery::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(policy.rng_seed);
    let mut budget = policy.rho_budget;
    let one = BigUint::one();
    while budget > 0 {
        let c = ctx.to_mont(&rng.gen_biguint_range(&one, n));
        let start = ctx.to_mont(&rng.gen_biguint_below(n));
        match brent(&ctx, &c, start, &mut budget, deadline) {
            Walk::Found(g) => return Some(g),
            Walk::Degenerate => continue,
            Walk::Exhausted => return None,
        }
    }
    None
}

fn brent(
    ctx: &Montgomery,
    c: &Residue,
    start: Residue,
    budget: &mut u64,
    deadline: Option<Instant>,
) -> Walk {
    let n = ctx.modulus();
    let mut tmp = ctx.zero();
    let mut diff = ctx.zero();
    let step = |y: &mut Residue, tmp: &mut Residue| {
        ctx.square(y, tmp);
        ctx.add_assign(tmp, c);
        std::mem::swap(y, tmp);
    };

    let mut y = start;
    let mut x;
    let mut ys;
    let mut q = ctx.one();
    let mut r: u64 = 1;
    loop {
        x = y.clone();
        for _ in 0..r {
            step(&mut y, &mut tmp);
        }
        let mut k = 0;
        while k < r {
            if *budget == 0 || deadline.is_some_and(|d| Instant::now() >= d) {
                return Walk::Exhausted;
            }
            ys = y.clone();
            let len = BATCH.min(r - k).min(*budget);
            for _ in 0..len {
                step(&mut y, &mut tmp);
                ctx.sub(&x, &y, &mut diff);
                ctx.mul(&q, &diff, &mut tmp);
                std::mem::swap(&mut q, &mut tmp);
            }
            *budget -= len;
            k += len;
            let g = biguint_of(&q).gcd(n);
            if g.is_one() {
                continue;
            }
            if &g != n {
                return Walk::Found(g);
            }
            // Overshot: replay the batch one step at a time.
            loop {
                step(&mut ys, &mut tmp);
                ctx.sub(&x, &ys, &mut diff);
                let g = biguint_of(&diff).gcd(n);
                if g.is_one() {
                    continue;
                }
                return if &g == n { Walk::Degenerate } else { Walk::Found(g) };
            }
        }
        r *= 2;
    }
}
