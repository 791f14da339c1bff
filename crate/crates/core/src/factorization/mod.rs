//! Arbitrary-precision factorization with budgeted methods.
//!
//! [`factor`] runs trial division, a primality screen, perfect-power
//! extraction, then Pollard p-1 and rho on whatever is still composite.
//! Running out of budget is not an error: the result is a
//! [`Factorization`] with a composite cofactor and [`Status::Partial`].

mod montgomery;
mod pminus1;
mod primality;
mod rho;
mod trial;

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use montgomery::Montgomery;
pub use pminus1::pollard_p_minus_1;
pub use primality::{is_prime_u64, is_probable_prime, Primality, DETERMINISTIC_BOUND};
pub use rho::pollard_rho;
pub use trial::trial_division;

/// Arbitrary-precision nonnegative integer.
pub type Natural = BigUint;

/// Budgets and knobs for one factoring run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorPolicy {
    pub trial_bound: u64,
    /// Only try primes `p = 1 (mod m)` during trial division.
    pub residue_modulus: Option<u64>,
    /// Iterations per rho invocation.
    pub rho_budget: u64,
    pub p_minus_1_bound: u64,
    pub rng_seed: u64,
    pub mr_rounds: u64,
    /// Soft wall-clock limit for one `factor` call.
    pub time_budget: Option<Duration>,
}

impl Default for FactorPolicy {
    fn default() -> Self {
        FactorPolicy {
            trial_bound: 100_000,
            residue_modulus: None,
            rho_budget: 100_000_000,
            p_minus_1_bound: 100_000,
            rng_seed: 1,
            mr_rounds: 64,
            time_budget: None,
        }
    }
}

impl FactorPolicy {
    /// Restricts trial division to `p = 1 (mod m)`; the smaller candidate set
    /// allows a trial bound of 10^6.
    pub fn with_residue_hint(&self, m: u64) -> Self {
        FactorPolicy {
            residue_modulus: Some(m),
            trial_bound: self.trial_bound.max(1_000_000),
            ..self.clone()
        }
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.time_budget.map(|d| Instant::now() + d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Certainty {
    Proven,
    Probable,
}

impl From<Primality> for Certainty {
    fn from(p: Primality) -> Self {
        match p {
            Primality::Prime => Certainty::Proven,
            _ => Certainty::Probable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub exponent: u64,
    pub certainty: Certainty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Complete,
    Partial,
}

/// Prime-to-exponent map plus an optional unsplit composite cofactor.
///
/// The product of all prime powers and the cofactor is the factored number.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    factors: BTreeMap<Natural, PrimePower>,
    cofactor: Option<Natural>,
}

impl Factorization {
    /// The empty factorization of 1.
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a factorization from parts. The cofactor, if any, must exceed 1;
    /// callers are responsible for it being composite.
    pub fn from_parts(
        factors: impl IntoIterator<Item = (Natural, PrimePower)>,
        cofactor: Option<Natural>,
    ) -> Result<Self> {
        let mut f = Factorization::one();
        for (p, pp) in factors {
            if p < BigUint::from(2u32) || pp.exponent == 0 {
                return Err(Error::domain(format!("invalid prime power {p}^{}", pp.exponent)));
            }
            f.insert(p, pp.exponent, pp.certainty);
        }
        if let Some(c) = &cofactor {
            if c <= &BigUint::one() {
                return Err(Error::domain("cofactor must exceed 1"));
            }
        }
        f.cofactor = cofactor;
        Ok(f)
    }

    pub fn factors(&self) -> &BTreeMap<Natural, PrimePower> {
        &self.factors
    }

    pub fn cofactor(&self) -> Option<&Natural> {
        self.cofactor.as_ref()
    }

    pub fn status(&self) -> Status {
        if self.cofactor.is_none() {
            Status::Complete
        } else {
            Status::Partial
        }
    }

    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    pub fn primes(&self) -> impl Iterator<Item = &Natural> {
        self.factors.keys()
    }

    pub fn exponent(&self, p: &Natural) -> u64 {
        self.factors.get(p).map_or(0, |pp| pp.exponent)
    }

    /// Adds `p^e`; a repeated prime accumulates its exponent and keeps the
    /// stronger certainty.
    pub fn insert(&mut self, p: Natural, e: u64, certainty: Certainty) {
        let entry = self.factors.entry(p).or_insert(PrimePower { exponent: 0, certainty });
        entry.exponent += e;
        entry.certainty = entry.certainty.min(certainty);
    }

    pub fn value(&self) -> Natural {
        let mut v = self
            .factors
            .iter()
            .fold(BigUint::one(), |acc, (p, pp)| acc * p.pow(pp.exponent as u32));
        if let Some(c) = &self.cofactor {
            v *= c;
        }
        v
    }

    /// Number of divisors; known only for complete factorizations.
    pub fn tau(&self) -> Option<Natural> {
        self.is_complete().then(|| {
            self.factors
                .values()
                .fold(BigUint::one(), |acc, pp| acc * (pp.exponent + 1))
        })
    }

    /// Distinct primes found so far.
    pub fn omega_known(&self) -> u64 {
        self.factors.len() as u64
    }

    /// Lower bound on the number of distinct primes; exact when complete.
    ///
    /// Relies on the cofactor being coprime to the listed primes, which
    /// [`factor`] guarantees.
    pub fn omega_lower_bound(&self) -> u64 {
        self.omega_known() + u64::from(self.cofactor.is_some())
    }

    pub fn big_omega_known(&self) -> u64 {
        self.factors.values().map(|pp| pp.exponent).sum()
    }

    pub fn has_probable_primes(&self) -> bool {
        self.factors.values().any(|pp| pp.certainty == Certainty::Probable)
    }

    /// Multiplies two factorizations; cofactors multiply together.
    pub fn multiply(&mut self, other: &Factorization) {
        for (p, pp) in &other.factors {
            self.insert(p.clone(), pp.exponent, pp.certainty);
        }
        self.cofactor = match (self.cofactor.take(), &other.cofactor) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a * b),
        };
    }

    /// Replaces the cofactor by its own factorization.
    pub fn refine(&mut self, cofactor_factorization: &Factorization) -> Result<()> {
        let c = self
            .cofactor
            .take()
            .ok_or_else(|| Error::domain("refine needs a partial factorization"))?;
        if cofactor_factorization.value() != c {
            self.cofactor = Some(c);
            return Err(Error::domain("refinement does not multiply to the cofactor"));
        }
        self.multiply(cofactor_factorization);
        Ok(())
    }

    /// Divides every listed prime out of the cofactor, dropping it if it
    /// becomes 1 or promoting it if it becomes prime.
    pub(crate) fn normalize(&mut self, policy: &FactorPolicy) {
        let Some(mut c) = self.cofactor.take() else { return };
        let primes: Vec<Natural> = self.factors.keys().cloned().collect();
        for p in primes {
            let mut e = 0;
            while (&c % &p).is_zero() {
                c /= &p;
                e += 1;
            }
            if e > 0 {
                self.factors.get_mut(&p).unwrap().exponent += e;
            }
        }
        if c.is_one() {
            return;
        }
        match is_probable_prime(&c, policy) {
            Primality::Composite => self.cofactor = Some(c),
            v => self.insert(c, 1, v.into()),
        }
    }
}

impl fmt::Display for Factorization {
    /// Space-separated `p^e` list with `?` marking probable primes and
    /// `C:n` for the cofactor.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if first {
                first = false;
                Ok(())
            } else {
                f.write_str(" ")
            }
        };
        for (p, pp) in &self.factors {
            sep(f)?;
            write!(f, "{p}")?;
            if pp.exponent > 1 {
                write!(f, "^{}", pp.exponent)?;
            }
            if pp.certainty == Certainty::Probable {
                f.write_str("?")?;
            }
        }
        if let Some(c) = &self.cofactor {
            sep(f)?;
            write!(f, "C:{c}")?;
        }
        Ok(())
    }
}

/// `Some((r, k))` with `n = r^k` and `k >= 2` maximal, else `None`.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if n <= &BigUint::from(3u32) {
        return None;
    }
    let mut best = None;
    let mut base = n.clone();
    // Peel exponents greedily; each successful root shrinks the search.
    loop {
        let bits = base.bits();
        let mut reduced = false;
        for k in 2..=bits as u32 {
            let r = base.nth_root(k);
            if r <= BigUint::one() {
                break;
            }
            if r.pow(k) == base {
                let total = best.as_ref().map_or(1, |&(_, e): &(BigUint, u32)| e) * k;
                best = Some((r.clone(), total));
                base = r;
                reduced = true;
                break;
            }
        }
        if !reduced {
            return best;
        }
    }
}

/// Factors `n >= 1` under `policy`.
pub fn factor(n: &Natural, policy: &FactorPolicy) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::domain("cannot factor 0"));
    }
    let deadline = policy.deadline();
    let mut result = Factorization::one();
    let (found, rest) = trial_division(n, policy);
    for (p, e) in found {
        result.insert(p, e, Certainty::Proven);
    }

    let mut cofactor = BigUint::one();
    let mut work: Vec<(Natural, u64)> = vec![(rest, 1)];
    while let Some((mut m, mult)) = work.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(tz) = m.trailing_zeros().filter(|&t| t > 0) {
            result.insert(BigUint::from(2u32), tz * mult, Certainty::Proven);
            m >>= tz;
            if m.is_one() {
                continue;
            }
        }
        let verdict = is_probable_prime(&m, policy);
        if verdict.is_prime_like() {
            result.insert(m, mult, verdict.into());
            continue;
        }
        if let Some((root, k)) = perfect_power(&m) {
            work.push((root, mult * k as u64));
            continue;
        }
        let split = pminus1::pollard_p_minus_1_until(&m, policy, deadline)
            .or_else(|| rho::pollard_rho_until(&m, policy, deadline));
        match split {
            Some(g) => {
                let h = &m / &g;
                work.push((g, mult));
                work.push((h, mult));
            }
            None => cofactor *= m.pow(mult as u32),
        }
    }
    if !cofactor.is_one() {
        result.cofactor = Some(cofactor);
        result.normalize(policy);
    }
    debug_assert_eq!(&result.value(), n, "factorization does not reconstruct its input");
    Ok(result)
}

/// Complete factorization of a machine integer as sorted `(prime, exponent)` pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut policy = FactorPolicy::default();
    loop {
        let f = factor(&BigUint::from(n), &policy).expect("n >= 1");
        if f.is_complete() {
            return f
                .factors()
                .iter()
                .map(|(p, pp)| (p.to_u64().unwrap(), pp.exponent as u32))
                .collect();
        }
        policy.rng_seed += 1;
    }
}
