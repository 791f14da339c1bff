//! Highly composite numbers: `N` with more divisors than every smaller integer.
//!
//! Every such `N` is `2^e1 3^e2 ... p_t^et` with `e1 >= e2 >= ... >= et >= 1`,
//! so enumerating those shapes below a limit and keeping the running
//! divisor-count records yields exactly the highly composite numbers.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::arithmetic::first_primes;
use crate::error::{Error, Result};
use crate::factorization::Natural;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HcnRecord {
    pub n: Natural,
    /// Nonincreasing exponents over 2, 3, 5, ... (empty for 1).
    pub exponents: Vec<u32>,
    pub tau: Natural,
}

impl HcnRecord {
    /// Builds the record for `prod p_k^{e_k}`. Panics unless the exponents are
    /// positive and nonincreasing.
    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        assert!(
            exponents.windows(2).all(|w| w[0] >= w[1]) && exponents.iter().all(|&e| e > 0),
            "exponents must be positive and nonincreasing: {exponents:?}"
        );
        let primes = first_primes(exponents.len());
        let n = primes
            .iter()
            .zip(&exponents)
            .fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e));
        let tau = exponents
            .iter()
            .fold(BigUint::one(), |acc, &e| acc * (e + 1));
        HcnRecord { n, exponents, tau }
    }

    pub fn leading_exponent(&self) -> u32 {
        self.exponents.first().copied().unwrap_or(0)
    }
}

fn collect_shapes(
    limit: &BigUint,
    primes: &[u64],
    depth: usize,
    max_exp: u32,
    current: &BigUint,
    exps: &mut Vec<u32>,
    out: &mut Vec<(BigUint, BigUint, Vec<u32>)>,
) {
    let tau = exps.iter().fold(BigUint::one(), |acc, &e| acc * (e + 1));
    out.push((current.clone(), tau, exps.clone()));
    let Some(&p) = primes.get(depth) else { return };
    let mut value = current.clone();
    for e in 1..=max_exp {
        value *= p;
        if &value > limit {
            break;
        }
        exps.push(e);
        collect_shapes(limit, primes, depth + 1, e, &value, exps, out);
        exps.pop();
    }
}

/// All highly composite numbers `<= limit`, increasing.
pub fn enumerate_hcn(limit: &Natural) -> Vec<HcnRecord> {
    if limit < &BigUint::one() {
        return Vec::new();
    }
    // Enough primes that their product exceeds the limit.
    let mut primes = Vec::new();
    let mut primorial = BigUint::one();
    for p in first_primes(limit.bits() as usize + 1) {
        if &primorial > limit {
            break;
        }
        primorial *= p;
        primes.push(p);
    }
    let max_exp = limit.bits() as u32;
    let mut shapes = Vec::new();
    collect_shapes(limit, &primes, 0, max_exp, &BigUint::one(), &mut Vec::new(), &mut shapes);
    shapes.sort_by(|a, b| a.0.cmp(&b.0));

    let mut best = BigUint::from(0u32);
    let mut out = Vec::new();
    for (n, tau, exponents) in shapes {
        if tau > best {
            best = tau.clone();
            out.push(HcnRecord { n, exponents, tau });
        }
    }
    out
}

/// The largest highly composite number not exceeding `n >= 1`; it always
/// exceeds `n / 2` because `tau(2m) > tau(m)`.
pub fn largest_hcn_leq(n: &Natural) -> Result<HcnRecord> {
    if n < &BigUint::one() {
        return Err(Error::domain("largest_hcn_leq needs n >= 1"));
    }
    let rec = enumerate_hcn(n).pop().expect("1 is highly composite");
    assert!(&(&rec.n * 2u32) > n, "largest HCN {} <= {n}/2", rec.n);
    Ok(rec)
}

/// `tau(2N) - tau(N)` for a highly composite `N`, which equals `tau(N) / (e1 + 1)`.
pub fn tau_jump(record: &HcnRecord) -> Natural {
    let e1 = record.leading_exponent();
    let tau_double = &record.tau / (e1 + 1) * (e1 + 2);
    let jump = tau_double - &record.tau;
    assert_eq!(&jump * (e1 + 1), record.tau, "tau jump identity failed at N = {}", record.n);
    jump
}

/// Natural logarithm of an arbitrary-size integer (> 0).
pub(crate) fn ln_natural(n: &Natural) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log2 tau(N) * ln ln N / ln N`; data for the trend towards 1, not a claim.
pub fn hcn_tau_exponent(record: &HcnRecord) -> Result<f64> {
    if record.n <= BigUint::from(2u32) {
        return Err(Error::domain("tau exponent needs N >= 3"));
    }
    let ln_n = ln_natural(&record.n);
    Ok(ln_natural(&record.tau) / std::f64::consts::LN_2 * ln_n.ln() / ln_n)
}
