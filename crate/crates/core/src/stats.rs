//! Divisor statistics of `2^n - 1` and `2^n + 1` assembled from `Phi_d(2)`.
//!
//! Data for a statistic is looked up in this order: a complete factorization
//! in the store, an imported sequence table, then native factoring under the
//! context's policy (whose results are written back to the store).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, RwLock, RwLockReadGuard};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arithmetic::{big_omega_small, divisors, factor_small, multiplicative_order, tau_small};
use crate::cyclotomic::{CyclotomicValue, OmegaPhi2};
use crate::error::{Error, Result};
use crate::factorization::{factor, FactorPolicy, Factorization, Natural, Status};
use crate::store::{BFile, BFileKind, FactorStore, Kind, Provenance, StoreKey, StoreRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }

    fn kind(self) -> Kind {
        match self {
            Sign::Minus => Kind::MersenneMinus,
            Sign::Plus => Kind::MersennePlus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// The `d` with `2^n -+ 1 = prod Phi_d(2)`: `d | n` for minus, `d | 2n` with
/// `d` not dividing `n` for plus.
pub fn divisor_set(n: u64, sign: Sign) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::domain("Mersenne index must be positive"));
    }
    match sign {
        Sign::Minus => divisors(n),
        Sign::Plus => {
            let two_n = n.checked_mul(2).ok_or(Error::Overflow("divisor_set"))?;
            Ok(divisors(two_n)?.into_iter().filter(|d| !n.is_multiple_of(*d)).collect())
        }
    }
}

/// `f'(n) = sum_{k <= n} 2^tau(k)`.
pub fn f_prime_sum(n: u64) -> Result<Natural> {
    let mut total = BigUint::zero();
    for k in 1..=n {
        total += BigUint::one() << tau_small(k)?;
    }
    Ok(total)
}

/// Distinct prime count, exact or a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaCount {
    pub value: u64,
    pub exact: bool,
}

impl fmt::Display for OmegaCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            write!(f, "{}", self.value)
        } else {
            write!(f, ">={}", self.value)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MersenneRow {
    pub n: u64,
    pub sign: Sign,
    pub tau: Option<Natural>,
    pub omega: OmegaCount,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HcmRow {
    pub n: u64,
    pub tau_minus: Natural,
    pub tau_plus: Natural,
    /// `tau(2^n + 1) / n`.
    pub ratio_plus: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarySeries {
    /// `f(1), ..., f(2 max_n)`.
    pub f: Vec<Natural>,
    /// `f'(1), ..., f'(2 max_n)`.
    pub f_prime: Vec<Natural>,
    /// `f(2n) / f(n)` for `n = 1..=max_n`.
    pub ratio: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaDecomposition {
    pub n: u64,
    /// `omega(2^n - 1)`.
    pub lhs: u64,
    /// `sum_{d | n} omega(Phi_d(2))`.
    pub rhs_sum: u64,
    /// `rhs_sum - lhs`: primes counted once per piece they occur in.
    pub defect: i64,
}

impl OmegaDecomposition {
    /// The defect equals [`predicted_defect`] and lies in `0..=Omega(n)`.
    pub fn holds(&self) -> bool {
        let big_omega = big_omega_small(self.n).unwrap_or(0) as i64;
        let predicted = predicted_defect(self.n).map(|v| v as i64).ok();
        predicted == Some(self.defect) && (0..=big_omega).contains(&self.defect)
    }
}

/// `sum_d omega(Phi_d(2)) - omega(2^n - 1)` from the divisibility rule: an odd
/// prime `p` divides `Phi_d(2)` exactly for `d = ord_p(2) p^j`, so a prime
/// `p | n` with `ord_p(2) | n` is counted `v_p(n / ord_p(2))` extra times.
pub fn predicted_defect(n: u64) -> Result<u64> {
    let mut total = 0;
    for (p, _) in factor_small(n)? {
        if p == 2 {
            continue;
        }
        let ord = multiplicative_order(2, p)?;
        if !n.is_multiple_of(ord) {
            continue;
        }
        let mut q = n / ord;
        while q.is_multiple_of(p) {
            q /= p;
            total += 1;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture2Scan {
    pub exceptions: Vec<u64>,
    pub sup_ratio: f64,
    pub argmax_d: u64,
}

/// Sequence tables loaded from files, used when the store lacks a
/// complete factorization.
#[derive(Debug, Clone, Default)]
pub struct ImportedTables {
    pub tau_minus: Option<BFile>,
    pub tau_plus: Option<BFile>,
    pub omega_phi2: Option<BFile>,
    pub sources: Vec<String>,
}

impl ImportedTables {
    fn tau(&self, sign: Sign) -> Option<&BFile> {
        match sign {
            Sign::Minus => self.tau_minus.as_ref(),
            Sign::Plus => self.tau_plus.as_ref(),
        }
    }
}

/// Shared state for statistics: the factor store, imported tables and the
/// factoring policy.
pub struct MersenneStats {
    store: RwLock<FactorStore>,
    policy: FactorPolicy,
    imports: ImportedTables,
    pool: Option<rayon::ThreadPool>,
    attempted: Mutex<BTreeSet<u64>>,
    exhausted: Mutex<BTreeSet<u64>>,
    dirty: AtomicBool,
    offline: bool,
}

impl MersenneStats {
    pub fn new(store: FactorStore, policy: FactorPolicy) -> Self {
        MersenneStats {
            store: RwLock::new(store),
            policy,
            imports: ImportedTables::default(),
            pool: None,
            attempted: Mutex::new(BTreeSet::new()),
            exhausted: Mutex::new(BTreeSet::new()),
            dirty: AtomicBool::new(false),
            offline: false,
        }
    }

    /// Disables native factoring: only stored and imported data are used.
    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }

    /// Limits parallel factoring to `workers` threads (0 keeps the default).
    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        if workers > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
            self.pool = Some(pool);
        }
        Ok(self)
    }

    pub fn add_import(&mut self, kind: BFileKind, table: BFile, source: impl Into<String>) {
        let slot = match kind {
            BFileKind::TauMersenneMinus => &mut self.imports.tau_minus,
            BFileKind::TauMersennePlus => &mut self.imports.tau_plus,
            BFileKind::OmegaPhi2 => &mut self.imports.omega_phi2,
        };
        *slot = Some(table);
        self.imports.sources.push(source.into());
    }

    pub fn imports(&self) -> &ImportedTables {
        &self.imports
    }

    pub fn policy(&self) -> &FactorPolicy {
        &self.policy
    }

    pub fn store(&self) -> RwLockReadGuard<'_, FactorStore> {
        self.store.read().expect("store lock poisoned")
    }

    pub fn into_store(self) -> FactorStore {
        self.store.into_inner().expect("store lock poisoned")
    }

    /// Whether native factoring added anything to the store.
    pub fn is_dirty(&self) -> bool {
        self.dirty.load(Ordering::Relaxed)
    }

    fn stored(&self, key: &StoreKey) -> Option<Factorization> {
        self.store().get(key).map(|r| r.factorization.clone())
    }

    fn stored_complete(&self, key: &StoreKey) -> Option<Factorization> {
        self.stored(key).filter(Factorization::is_complete)
    }

    fn phi2_known(&self, d: u64) -> Option<Factorization> {
        if d == 1 {
            return Some(Factorization::one());
        }
        self.stored_complete(&StoreKey::phi2(d))
    }

    fn compute_phi2(&self, d: u64, prior: Option<Factorization>) -> Result<(Factorization, bool)> {
        let cv = CyclotomicValue::new(d)?;
        let start = Instant::now();
        let f = match prior {
            Some(mut p) if !p.is_complete() => {
                let c = p.cofactor().expect("partial").clone();
                let cf = factor(&c, &self.policy.with_residue_hint(cv.residue_hint()))?;
                p.refine(&cf)?;
                p
            }
            _ => cv.factor(&self.policy)?,
        };
        let hit = !f.is_complete() && self.policy.time_budget.is_some_and(|b| start.elapsed() >= b);
        Ok((f, hit))
    }

    /// Factors every `Phi_d(2)` in `ds` not yet complete in the store, in
    /// parallel, then records the results. Pieces already attempted by this
    /// context are not retried.
    pub fn prefetch(&self, ds: &[u64]) -> Result<()> {
        let todo: Vec<(u64, Option<Factorization>)> = {
            let attempted = self.attempted.lock().expect("poisoned");
            let wanted: BTreeSet<u64> = ds.iter().copied().filter(|&d| d > 1).collect();
            wanted
                .into_iter()
                .filter(|d| !attempted.contains(d))
                .filter_map(|d| {
                    let prior = self.stored(&StoreKey::phi2(d));
                    match prior {
                        Some(f) if f.is_complete() => None,
                        other => Some((d, other)),
                    }
                })
                .collect()
        };
        if todo.is_empty() || self.offline {
            return Ok(());
        }
        let work = || {
            todo.into_par_iter()
                .map(|(d, prior)| (d, self.compute_phi2(d, prior)))
                .collect::<Vec<_>>()
        };
        let results = match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        };
        let mut store = self.store.write().expect("store lock poisoned");
        let mut attempted = self.attempted.lock().expect("poisoned");
        let mut exhausted = self.exhausted.lock().expect("poisoned");
        for (d, outcome) in results {
            let (f, hit) = outcome?;
            attempted.insert(d);
            if hit {
                exhausted.insert(d);
            }
            store.upsert(StoreRecord::new(StoreKey::phi2(d), f, Provenance::Computed))?;
            self.dirty.store(true, Ordering::Relaxed);
        }
        Ok(())
    }

    /// Factorization of `Phi_d(2)`, possibly partial.
    pub fn phi2_factorization(&self, d: u64) -> Result<Factorization> {
        if d == 0 {
            return Err(Error::domain("Phi_0 is undefined"));
        }
        if let Some(f) = self.phi2_known(d) {
            return Ok(f);
        }
        self.prefetch(&[d])?;
        match self.stored(&StoreKey::phi2(d)) {
            Some(f) => Ok(f),
            None => Factorization::from_parts([], Some(crate::cyclotomic::phi2(d)?)),
        }
    }

    pub(crate) fn missing_error(&self, what: String, missing: Vec<u64>, blocking: &BTreeSet<u64>) -> Error {
        let exhausted = self.exhausted.lock().expect("poisoned");
        let what = if blocking.is_empty() {
            what
        } else {
            let ds: Vec<String> = blocking.iter().take(20).map(u64::to_string).collect();
            format!("{what} (unfactored Phi_d(2) for d = {})", ds.join(","))
        };
        if blocking.iter().any(|d| exhausted.contains(d)) {
            Error::Budget { what, missing }
        } else {
            Error::Incomplete { what, missing }
        }
    }

    fn blocking(&self, ds: &[u64]) -> BTreeSet<u64> {
        ds.iter().copied().filter(|&d| self.phi2_known(d).is_none()).collect()
    }

    /// Factorization of `2^n -+ 1`; partial if any piece is.
    pub fn factor_mersenne(&self, n: u64, sign: Sign) -> Result<Factorization> {
        let ds = divisor_set(n, sign)?;
        if let Some(f) = self.stored_complete(&StoreKey::new(sign.kind(), n)?) {
            return Ok(f);
        }
        self.prefetch(&ds)?;
        let mut total = Factorization::one();
        for d in ds {
            total.multiply(&self.phi2_factorization(d)?);
        }
        Ok(total)
    }

    pub fn mersenne_row(&self, n: u64, sign: Sign) -> Result<MersenneRow> {
        let f = self.factor_mersenne(n, sign)?;
        Ok(MersenneRow {
            n,
            sign,
            tau: f.tau(),
            omega: OmegaCount { value: f.omega_lower_bound(), exact: f.is_complete() },
            status: f.status(),
        })
    }

    fn assembled_tau(&self, n: u64, sign: Sign) -> Result<Option<Natural>> {
        if let Some(f) = self.stored_complete(&StoreKey::new(sign.kind(), n)?) {
            return Ok(f.tau());
        }
        let mut total = Factorization::one();
        for d in divisor_set(n, sign)? {
            match self.phi2_known(d) {
                Some(f) => total.multiply(&f),
                None => return Ok(None),
            }
        }
        Ok(total.tau())
    }

    fn tau_available(&self, n: u64, sign: Sign) -> Result<bool> {
        Ok(self.imports.tau(sign).is_some_and(|b| b.get(n).is_some())
            || self.assembled_tau(n, sign)?.is_some())
    }

    /// `tau(2^n -+ 1)`; fails naming the unfactored pieces if it cannot be
    /// determined.
    pub fn tau_mersenne(&self, n: u64, sign: Sign) -> Result<Natural> {
        if let Some(t) = self.assembled_tau(n, sign)? {
            return Ok(t);
        }
        if let Some(t) = self.imports.tau(sign).and_then(|b| b.get(n)) {
            return Ok(t.clone());
        }
        let f = self.factor_mersenne(n, sign)?;
        match f.tau() {
            Some(t) => Ok(t),
            None => {
                let blocking = self.blocking(&divisor_set(n, sign)?);
                Err(self.missing_error(
                    format!("tau(2^{n}{sign}1)"),
                    blocking.iter().copied().collect(),
                    &blocking,
                ))
            }
        }
    }

    pub fn omega_mersenne(&self, n: u64, sign: Sign) -> Result<OmegaCount> {
        let f = self.factor_mersenne(n, sign)?;
        Ok(OmegaCount { value: f.omega_lower_bound(), exact: f.is_complete() })
    }

    /// `omega(Phi_d(2))`, exact or a lower bound.
    pub fn omega_phi2(&self, d: u64) -> Result<OmegaPhi2> {
        if let Some(f) = self.phi2_known(d) {
            return Ok(OmegaPhi2::from_factorization(d, &f));
        }
        if let Some(w) = self.imports.omega_phi2.as_ref().and_then(|b| b.get(d)) {
            let omega = u64::try_from(w).map_err(|_| Error::Overflow("omega_phi2"))?;
            return Ok(OmegaPhi2 { d, omega, exact: true });
        }
        let f = self.phi2_factorization(d)?;
        Ok(OmegaPhi2::from_factorization(d, &f))
    }

    /// `tau(2^k -+ 1)` for `k = 1..=max`, or an error listing every missing `k`.
    pub fn tau_series(&self, sign: Sign, max: u64) -> Result<Vec<Natural>> {
        let mut need = Vec::new();
        for k in 1..=max {
            if !self.tau_available(k, sign)? {
                need.extend(divisor_set(k, sign)?);
            }
        }
        self.prefetch(&need)?;
        let mut out = Vec::with_capacity(max as usize);
        let mut missing = Vec::new();
        let mut blocking = BTreeSet::new();
        for k in 1..=max {
            match self.tau_mersenne(k, sign) {
                Ok(t) => out.push(t),
                Err(Error::Incomplete { .. } | Error::Budget { .. }) => {
                    missing.push(k);
                    blocking.extend(self.blocking(&divisor_set(k, sign)?));
                }
                Err(e) => return Err(e),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(self.missing_error(format!("tau(2^k{sign}1), k <= {max}"), missing, &blocking))
        }
    }

    /// `f(n) = sum_{k <= n} tau(2^k - 1)`.
    pub fn f_sum(&self, n: u64) -> Result<Natural> {
        Ok(self.tau_series(Sign::Minus, n)?.into_iter().sum())
    }

    pub fn ratio_series(&self, max_n: u64) -> Result<SummarySeries> {
        let taus = self.tau_series(Sign::Minus, 2 * max_n)?;
        let mut f = Vec::with_capacity(taus.len());
        let mut f_prime = Vec::with_capacity(taus.len());
        let (mut acc, mut acc_prime) = (BigUint::zero(), BigUint::zero());
        for (i, t) in taus.into_iter().enumerate() {
            acc += t;
            acc_prime += BigUint::one() << tau_small(i as u64 + 1)?;
            f.push(acc.clone());
            f_prime.push(acc_prime.clone());
        }
        let ratio = (1..=max_n as usize)
            .map(|n| {
                BigRational::new(BigInt::from(f[2 * n - 1].clone()), BigInt::from(f[n - 1].clone()))
            })
            .collect();
        Ok(SummarySeries { f, f_prime, ratio })
    }

    /// Indices `N <= limit` with `tau(2^N - 1)` above every earlier value.
    pub fn tau_records(&self, limit: u64) -> Result<Vec<(u64, Natural)>> {
        let mut best = BigUint::zero();
        let mut out = Vec::new();
        for (i, t) in self.tau_series(Sign::Minus, limit)?.into_iter().enumerate() {
            if t > best {
                best = t.clone();
                out.push((i as u64 + 1, t));
            }
        }
        Ok(out)
    }

    pub fn hcm_indices(&self, limit: u64) -> Result<Vec<HcmRow>> {
        let records = self.tau_records(limit)?;
        let need: Vec<u64> = records
            .iter()
            .filter(|(n, _)| !self.tau_available(*n, Sign::Plus).unwrap_or(false))
            .flat_map(|(n, _)| divisor_set(*n, Sign::Plus).unwrap_or_default())
            .collect();
        self.prefetch(&need)?;
        let mut rows = Vec::new();
        let mut missing = Vec::new();
        let mut blocking = BTreeSet::new();
        for (n, tau_minus) in records {
            match self.tau_mersenne(n, Sign::Plus) {
                Ok(tau_plus) => {
                    let ratio_plus = BigRational::new(BigInt::from(tau_plus.clone()), BigInt::from(n));
                    rows.push(HcmRow { n, tau_minus, tau_plus, ratio_plus });
                }
                Err(Error::Incomplete { .. } | Error::Budget { .. }) => {
                    missing.push(n);
                    blocking.extend(self.blocking(&divisor_set(n, Sign::Plus)?));
                }
                Err(e) => return Err(e),
            }
        }
        if missing.is_empty() {
            Ok(rows)
        } else {
            Err(self.missing_error("tau(2^N+1) at record indices".into(), missing, &blocking))
        }
    }

    fn complete_mersenne(&self, n: u64, sign: Sign) -> Result<Factorization> {
        let f = self.factor_mersenne(n, sign)?;
        if f.is_complete() {
            return Ok(f);
        }
        let blocking = self.blocking(&divisor_set(n, sign)?);
        Err(self.missing_error(format!("2^{n}{sign}1"), vec![n], &blocking))
    }

    /// `tau(2^k - 1) >= 2^omega(2^k - 1) >= 2^tau(k) / 4`.
    pub fn compare_lower_bound(&self, k: u64) -> Result<bool> {
        let f = self.complete_mersenne(k, Sign::Minus)?;
        let tau = f.tau().expect("complete");
        let omega = f.omega_known();
        let two_omega = BigUint::one() << omega;
        Ok(tau >= two_omega && tau_small(k)? <= omega + 2)
    }

    /// `tau(2^n - 1) <= n^omega(2^n - 1)`.
    pub fn tau_upper_bound_check(&self, n: u64) -> Result<bool> {
        if n < 2 {
            return Err(Error::domain("upper bound check needs n >= 2"));
        }
        let f = self.complete_mersenne(n, Sign::Minus)?;
        let omega = u32::try_from(f.omega_known()).map_err(|_| Error::Overflow("omega"))?;
        Ok(f.tau().expect("complete") <= BigUint::from(n).pow(omega))
    }

    pub fn omega_decomposition_check(&self, n: u64) -> Result<OmegaDecomposition> {
        let f = self.complete_mersenne(n, Sign::Minus)?;
        let mut rhs_sum = 0;
        for d in divisors(n)? {
            rhs_sum += self.phi2_factorization(d)?.omega_known();
        }
        let lhs = f.omega_known();
        Ok(OmegaDecomposition { n, lhs, rhs_sum, defect: rhs_sum as i64 - lhs as i64 })
    }

    /// `(N, tau(2^N + 1) / N)` over the record indices up to `limit`.
    pub fn conjecture1_table(&self, limit: u64) -> Result<Vec<(u64, BigRational)>> {
        Ok(self.hcm_indices(limit)?.into_iter().map(|r| (r.n, r.ratio_plus)).collect())
    }

    /// Indices `2 <= d <= max_d` with `omega(Phi_d(2)) > c ln d`, and where
    /// `omega / ln d` peaks.
    pub fn conjecture2_scan(&self, max_d: u64, c: f64) -> Result<Conjecture2Scan> {
        if max_d < 2 {
            return Err(Error::domain("scan needs max_d >= 2"));
        }
        let imported = |d: u64| self.imports.omega_phi2.as_ref().is_some_and(|b| b.get(d).is_some());
        let need: Vec<u64> =
            (2..=max_d).filter(|&d| self.phi2_known(d).is_none() && !imported(d)).collect();
        self.prefetch(&need)?;
        let mut scan = Conjecture2Scan { exceptions: Vec::new(), sup_ratio: f64::NEG_INFINITY, argmax_d: 0 };
        let mut missing = Vec::new();
        for d in 2..=max_d {
            let w = self.omega_phi2(d)?;
            if !w.exact {
                missing.push(d);
                continue;
            }
            let ratio = w.ratio().expect("d >= 2");
            if ratio > scan.sup_ratio {
                scan.sup_ratio = ratio;
                scan.argmax_d = d;
            }
            if w.omega as f64 > c * (d as f64).ln() {
                scan.exceptions.push(d);
            }
        }
        if missing.is_empty() {
            Ok(scan)
        } else {
            let blocking = missing.iter().copied().collect();
            Err(self.missing_error("omega(Phi_d(2))".into(), missing, &blocking))
        }
    }

    /// With `N = 2^a M`, `M` odd: `tau(2^N + 1) >= 2^(tau(M) - 2)`, the
    /// bound taken as 1 when the exponent is negative.
    pub fn theorem3_bound_check(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::domain("index must be positive"));
        }
        let m = n >> n.trailing_zeros();
        let exponent = tau_small(m)?.saturating_sub(2);
        let tau_plus = self.tau_mersenne(n, Sign::Plus)?;
        Ok(tau_plus >= BigUint::one() << exponent)
    }

    /// `tau(2^(2m) - 1) > tau(2^m - 1)`.
    pub fn tau_doubling_check(&self, m: u64) -> Result<bool> {
        Ok(self.tau_mersenne(2 * m, Sign::Minus)? > self.tau_mersenne(m, Sign::Minus)?)
    }
}
