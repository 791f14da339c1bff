//! Machine-range number theory: sieve, divisor functions, orders.
//!
//! Everything here operates on `u64` inputs and is exact. Inputs that could
//! overflow are rejected rather than wrapped.

use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::factorization;

/// Default bound of the shared prime table.
pub const DEFAULT_PRIME_BOUND: u64 = 1_000_000;

/// All primes up to `bound`, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(bound: u64) -> Self {
        let n = usize::try_from(bound).expect("prime table bound exceeds address space");
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        PrimeTable { bound, primes }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p <= x`; `x` must not exceed the bound.
    pub fn primes_up_to(&self, x: u64) -> &[u64] {
        debug_assert!(x <= self.bound);
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.bound);
        self.primes.binary_search(&n).is_ok()
    }
}

static SHARED_TABLE: LazyLock<RwLock<Arc<PrimeTable>>> =
    LazyLock::new(|| RwLock::new(Arc::new(PrimeTable::new(DEFAULT_PRIME_BOUND))));

/// Shared prime table covering at least `bound`, extended on demand.
pub fn prime_table(bound: u64) -> Arc<PrimeTable> {
    {
        let table = SHARED_TABLE.read().unwrap();
        if table.bound() >= bound {
            return Arc::clone(&table);
        }
    }
    let mut table = SHARED_TABLE.write().unwrap();
    if table.bound() < bound {
        let new_bound = bound.max(table.bound().saturating_mul(2));
        *table = Arc::new(PrimeTable::new(new_bound));
    }
    Arc::clone(&table)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    result
}

fn require_positive(n: u64, what: &str) -> Result<()> {
    if n == 0 {
        Err(Error::domain(format!("{what} is undefined at 0")))
    } else {
        Ok(())
    }
}

/// Prime factorization of a machine integer as sorted `(prime, exponent)` pairs.
pub fn factor_small(n: u64) -> Result<Vec<(u64, u32)>> {
    require_positive(n, "factorization")?;
    let table = prime_table(DEFAULT_PRIME_BOUND);
    let mut rest = n;
    let mut out = Vec::new();
    for &p in table.primes() {
        if p.saturating_mul(p) > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if rest > 1 {
        let b = table.bound();
        if rest <= b || rest / b < b {
            out.push((rest, 1));
        } else {
            out.extend(factorization::factor_u64(rest));
            out.sort_unstable();
        }
    }
    Ok(out)
}

pub fn tau_small(n: u64) -> Result<u64> {
    Ok(factor_small(n)?.iter().map(|&(_, e)| e as u64 + 1).product())
}

pub fn omega_small(n: u64) -> Result<u64> {
    Ok(factor_small(n)?.len() as u64)
}

pub fn big_omega_small(n: u64) -> Result<u64> {
    Ok(factor_small(n)?.iter().map(|&(_, e)| e as u64).sum())
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factor_small(n)?
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product())
}

pub fn moebius(n: u64) -> Result<i8> {
    let f = factor_small(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    let f = factor_small(n)?;
    Ok(divisors_from_factors(&f))
}

pub(crate) fn divisors_from_factors(f: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in f {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Exponent of the unit group modulo `m`.
pub fn carmichael_lambda(m: u64) -> Result<u64> {
    let mut acc = 1u64;
    for (p, e) in factor_small(m)? {
        let l = if p == 2 {
            match e {
                1 => 1,
                2 => 2,
                _ => 1u64 << (e - 2),
            }
        } else {
            (p - 1) * p.pow(e - 1)
        };
        acc = acc.lcm(&l);
    }
    Ok(acc)
}

/// Least `e >= 1` with `a^e = 1 (mod m)`.
pub fn multiplicative_order(a: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::domain(format!("multiplicative order needs modulus >= 2, got {m}")));
    }
    if a.gcd(&m) != 1 {
        return Err(Error::domain(format!("{a} is not a unit modulo {m}")));
    }
    let mut order = carmichael_lambda(m)?;
    for (q, _) in factor_small(order)? {
        while order % q == 0 && pow_mod(a, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// Floor-sum form of the divisor summatory function: `sum_{l<=n} floor(n/l)`,
/// together with its mean over `1..=n`.
pub fn dirichlet_mean(n: u64) -> Result<(u64, Ratio<u64>)> {
    require_positive(n, "dirichlet_mean")?;
    // Pair up equal quotients: O(sqrt n) blocks.
    let mut sum = 0u64;
    let mut l = 1u64;
    while l <= n {
        let q = n / l;
        let last = n / q;
        sum = (last - l + 1)
            .checked_mul(q)
            .and_then(|block| sum.checked_add(block))
            .ok_or(Error::Overflow("dirichlet_mean"))?;
        l = last + 1;
    }
    Ok((sum, Ratio::new(sum, n)))
}

pub fn prime_pi(x: u64) -> u64 {
    prime_table(x).primes_up_to(x).len() as u64
}

/// Chebyshev's theta: sum of `ln p` over primes `p <= x`.
pub fn chebyshev_theta(x: u64) -> f64 {
    prime_table(x)
        .primes_up_to(x)
        .iter()
        .map(|&p| (p as f64).ln())
        .sum()
}

/// The first `t` primes.
pub fn first_primes(t: usize) -> Vec<u64> {
    let mut bound = DEFAULT_PRIME_BOUND;
    loop {
        let table = prime_table(bound);
        if table.primes().len() >= t {
            return table.primes()[..t].to_vec();
        }
        bound *= 2;
    }
}

/// Product of the first `t` primes; `primorial(0) = 1`.
pub fn primorial(t: usize) -> BigUint {
    first_primes(t)
        .into_iter()
        .fold(BigUint::from(1u32), |acc, p| acc * p)
}
