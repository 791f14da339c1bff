use num_bigint::BigUint;

use super::FactorPolicy;
use crate::arithmetic::prime_table;

fn rem_u64(limbs: &[u64], p: u64) -> u64 {
    limbs
        .iter()
        .rev()
        .fold(0u64, |r, &l| ((((r as u128) << 64) | l as u128) % p as u128) as u64)
}

/// Strips prime factors up to `policy.trial_bound`.
///
/// With a residue hint `m`, only primes `p = 1 (mod m)` are tried. Returns the
/// prime powers found (increasing) and the remaining cofactor.
pub fn trial_division(n: &BigUint, policy: &FactorPolicy) -> (Vec<(BigUint, u64)>, BigUint) {
    let table = prime_table(policy.trial_bound);
    let candidates = table.primes_up_to(policy.trial_bound);
    let modulus = policy.residue_modulus.filter(|&m| m > 1);

    let mut rest = n.clone();
    let mut limbs = rest.to_u64_digits();
    let mut found = Vec::new();
    for &p in candidates {
        if let Some(m) = modulus {
            if p % m != 1 {
                continue;
            }
        } else if rest.bits() <= 64 && p.saturating_mul(p) > limbs.first().copied().unwrap_or(0) {
            // Unrestricted search: whatever is left has no factor below p.
            let r = limbs.first().copied().unwrap_or(0);
            if r > 1 && r <= policy.trial_bound {
                found.push((BigUint::from(r), 1));
                rest = BigUint::from(1u32);
            }
            break;
        }
        if rem_u64(&limbs, p) != 0 {
            continue;
        }
        let mut e = 0u64;
        while rem_u64(&limbs, p) == 0 {
            rest /= p;
            limbs = rest.to_u64_digits();
            e += 1;
        }
        found.push((BigUint::from(p), e));
        if limbs.len() == 1 && limbs[0] == 1 {
            break;
        }
    }
    (found, rest)
}
