//! Table and series builders behind the command-line tool.
//!
//! Every command returns a [`Table`]; callers choose CSV or TSV and where to
//! write it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::arithmetic::{euler_phi, tau_small};
use crate::cyclotomic::{mersenne_minus, phi2, primitive_part, product_identity_check};
use crate::error::{Error, Result};
use crate::factorization::{factor, FactorPolicy, Factorization, Natural};
use crate::hcn::{enumerate_hcn, hcn_tau_exponent, tau_jump};
use crate::highprec::{ln2, ln_natural, ln_one_minus_pow2, Fixed};
use crate::render::{exact, ratio_4dp, real_4dp, trimmed};
use crate::stats::{divisor_set, f_prime_sum, MersenneStats, Sign};
use crate::store::{import_bfile, BFileKind, FactorStore, Provenance, STORE_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Tsv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "tsv" => Ok(OutputFormat::Tsv),
            other => Err(format!("unknown output format {other:?} (expected csv or tsv)")),
        }
    }
}

/// Rows with a header; `#` comment lines are written first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            comments: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let sep = match format {
            OutputFormat::Csv => ",",
            OutputFormat::Tsv => "\t",
        };
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str(&self.header.join(sep));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(sep));
            out.push('\n');
        }
        out
    }
}

/// What an `--import` path holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportKind {
    Table(BFileKind),
    Store,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportSpec {
    pub kind: ImportKind,
    pub path: PathBuf,
}

impl ImportSpec {
    /// Parses `KIND=PATH` (`tau-minus`, `tau-plus`, `omega-phi2`, `store`) or a
    /// bare path whose kind is inferred from the OEIS file name (`b046801`,
    /// `b046798`, `b085021`) or a store header.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some((kind, path)) = spec.split_once('=') {
            let kind = match kind {
                "store" => ImportKind::Store,
                other => ImportKind::Table(other.parse().map_err(Error::Domain)?),
            };
            return Ok(ImportSpec { kind, path: PathBuf::from(path) });
        }
        let path = PathBuf::from(spec);
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let kind = if name.starts_with("b046801") {
            ImportKind::Table(BFileKind::TauMersenneMinus)
        } else if name.starts_with("b046798") {
            ImportKind::Table(BFileKind::TauMersennePlus)
        } else if name.starts_with("b085021") {
            ImportKind::Table(BFileKind::OmegaPhi2)
        } else if fs::read_to_string(&path)
            .map(|t| t.lines().next() == Some(STORE_HEADER))
            .unwrap_or(false)
        {
            ImportKind::Store
        } else {
            return Err(Error::Domain(format!(
                "cannot tell what {spec} contains; use tau-minus=, tau-plus=, omega-phi2= or store="
            )));
        };
        Ok(ImportSpec { kind, path })
    }
}

impl fmt::Display for ImportSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ImportKind::Store => "store",
            ImportKind::Table(k) => k.name(),
        };
        write!(f, "{kind}={}", self.path.display())
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub store_path: Option<PathBuf>,
    pub imports: Vec<ImportSpec>,
    pub policy: FactorPolicy,
    pub workers: usize,
    /// Use only stored and imported data.
    pub offline: bool,
    pub output_format: OutputFormat,
    pub out_path: Option<PathBuf>,
}

impl RunConfig {
    /// Loads the store and every import into a statistics context.
    pub fn open(&self) -> Result<MersenneStats> {
        let mut store = match &self.store_path {
            Some(p) => FactorStore::load(p, Provenance::Computed)?,
            None => FactorStore::new(),
        };
        let mut tables = Vec::new();
        for spec in &self.imports {
            match spec.kind {
                ImportKind::Store => store.import_store_file(&spec.path)?,
                ImportKind::Table(k) => tables.push((k, import_bfile(k, &spec.path)?, spec.to_string())),
            }
        }
        let mut ctx = MersenneStats::new(store, self.policy.clone())
            .offline(self.offline)
            .with_workers(self.workers)?;
        for (k, t, label) in tables {
            ctx.add_import(k, t, label);
        }
        Ok(ctx)
    }

    /// Writes the store back if native factoring added records.
    pub fn save(&self, ctx: &MersenneStats) -> Result<()> {
        if let Some(p) = &self.store_path {
            if ctx.is_dirty() {
                ctx.store().export_store_file(p)?;
            }
        }
        Ok(())
    }

    /// Renders `table` to the output path or returns it for stdout.
    pub fn emit(&self, table: &Table) -> Result<Option<String>> {
        let text = table.render(self.output_format);
        match &self.out_path {
            Some(p) => {
                fs::write(p, text)?;
                Ok(None)
            }
            None => Ok(Some(text)),
        }
    }
}

fn provenance(ctx: &MersenneStats, table: &mut Table) {
    let sources = &ctx.imports().sources;
    if !sources.is_empty() {
        table.comments.push(format!("imported: {}", sources.join(", ")));
    }
    let imported = ctx
        .store()
        .iter()
        .filter(|r| r.provenance == Provenance::Imported)
        .count();
    if imported > 0 {
        table.comments.push(format!("imported store records: {imported}"));
    }
}

/// `d, omega(Phi_d(2)), omega / ln d`; unfinished rows show `>=` bounds.
pub fn table2(ctx: &MersenneStats, max_d: u64) -> Result<Table> {
    if max_d < 1 {
        return Err(Error::domain("max_d must be at least 1"));
    }
    let mut t = Table::new(&["d", "omega", "omega_over_log_d"]);
    let need: Vec<u64> = (2..=max_d).collect();
    if ctx.imports().omega_phi2.is_none() {
        ctx.prefetch(&need)?;
    }
    for d in 1..=max_d {
        let w = ctx.omega_phi2(d)?;
        let ratio = match (w.ratio(), w.exact) {
            (None, _) => String::new(),
            (Some(r), true) => real_4dp(r),
            (Some(r), false) => format!(">={}", real_4dp(r)),
        };
        let omega = if w.exact { w.omega.to_string() } else { format!(">={}", w.omega) };
        t.push(vec![d.to_string(), omega, ratio]);
    }
    provenance(ctx, &mut t);
    Ok(t)
}

/// Record indices of `tau(2^N - 1)` with `tau(2^N + 1) / N`.
pub fn table1(ctx: &MersenneStats, limit: u64) -> Result<Table> {
    let mut t = Table::new(&["N", "tau_minus", "tau_plus_over_N"]);
    for row in ctx.hcm_indices(limit)? {
        t.push(vec![row.n.to_string(), row.tau_minus.to_string(), ratio_4dp(&row.ratio_plus)]);
    }
    provenance(ctx, &mut t);
    Ok(t)
}

/// `n, tau(2^n - 1)`.
pub fn figure1(ctx: &MersenneStats, max_n: u64) -> Result<Table> {
    let mut t = Table::new(&["n", "tau"]);
    for (i, tau) in ctx.tau_series(Sign::Minus, max_n)?.into_iter().enumerate() {
        t.push(vec![(i + 1).to_string(), tau.to_string()]);
    }
    provenance(ctx, &mut t);
    Ok(t)
}

/// `n, f(2n)/f(n)` as a decimal and as an exact fraction.
pub fn figure2(ctx: &MersenneStats, max_n: u64) -> Result<Table> {
    let mut t = Table::new(&["n", "ratio", "ratio_exact"]);
    let series = ctx.ratio_series(max_n)?;
    for (i, r) in series.ratio.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), trimmed(r, 6), exact(r)]);
    }
    provenance(ctx, &mut t);
    Ok(t)
}

/// `d, omega(Phi_d(2))`; every value must be exact.
pub fn figure3(ctx: &MersenneStats, max_d: u64) -> Result<Table> {
    let mut t = Table::new(&["d", "omega"]);
    if ctx.imports().omega_phi2.is_none() {
        ctx.prefetch(&(2..=max_d).collect::<Vec<_>>())?;
    }
    let mut missing = Vec::new();
    for d in 1..=max_d {
        let w = ctx.omega_phi2(d)?;
        if !w.exact {
            missing.push(d);
        }
        t.push(vec![d.to_string(), w.omega.to_string()]);
    }
    if !missing.is_empty() {
        let blocking = missing.iter().copied().collect();
        return Err(ctx.missing_error("omega(Phi_d(2))".into(), missing, &blocking));
    }
    provenance(ctx, &mut t);
    Ok(t)
}

/// Highly composite numbers with `tau` and `log2 tau * ln ln N / ln N`.
pub fn hcn_table(limit: &Natural) -> Table {
    let mut t = Table::new(&["N", "tau", "tau_exponent", "exponents"]);
    for rec in enumerate_hcn(limit) {
        let expo = hcn_tau_exponent(&rec).map(|x| format!("{x:.6}")).unwrap_or_default();
        let exps: Vec<String> = rec.exponents.iter().map(u32::to_string).collect();
        t.push(vec![rec.n.to_string(), rec.tau.to_string(), expo, exps.join(" ")]);
    }
    t
}

/// Result of comparing `sum_{k <= n} ln(2^k - 1)` with `n(n+1) ln 2 / 2`.
#[derive(Debug, Clone)]
pub struct LogSum {
    pub n: u64,
    pub sum: Fixed,
    pub main_term: Fixed,
    /// `n^2 ln 2 / 2`.
    pub leading_term: Fixed,
    pub residual: Fixed,
    /// `2 sum_{k <= n} 2^-k`, which bounds `|residual|`.
    pub bound: Fixed,
}

pub fn log_sum(n: u64) -> Result<LogSum> {
    if n == 0 {
        return Err(Error::domain("log sum needs n >= 1"));
    }
    let mut sum = Fixed::zero();
    let mut series = Fixed::zero();
    for k in 1..=n {
        sum = sum.add(&ln_natural(&mersenne_minus(k)));
        series = series.add(&ln_one_minus_pow2(k));
    }
    let l2 = ln2();
    let main_term = l2.mul_int(n as u128 * (n as u128 + 1)).div_int(2);
    let leading_term = l2.mul_int(n as u128 * n as u128).div_int(2);
    let residual = sum.sub(&main_term);
    // 2 (1 - 2^-n)
    let one = Fixed::from_int(1);
    let bound = one.sub(&Fixed(one.0.clone() >> n.min(4096))).mul_int(2);
    let drift = residual.sub(&series).abs();
    assert!(
        drift.0.bits() < 64 + n.ilog2() as u64,
        "log routes disagree at n = {n}"
    );
    if residual.abs() > bound || residual.0.sign() != num_bigint::Sign::Minus {
        return Err(Error::Domain(format!("residual bound violated at n = {n}")));
    }
    Ok(LogSum { n, sum, main_term, leading_term, residual, bound })
}

pub fn log_sum_table(n: u64, digits: usize) -> Result<Table> {
    let r = log_sum(n)?;
    let mut t = Table::new(&["n", "log_sum", "main_term", "half_n_squared_log2", "residual", "residual_bound"]);
    t.push(vec![
        r.n.to_string(),
        r.sum.to_decimal(digits),
        r.main_term.to_decimal(digits),
        r.leading_term.to_decimal(digits),
        r.residual.to_decimal(digits),
        r.bound.to_decimal(digits),
    ]);
    Ok(t)
}

/// Largest `x` the big-omega sieve accepts.
pub const OMEGA_SIEVE_LIMIT: u64 = 100_000_000;

/// `counts[K] = #{n <= x : Omega(n) = K}`.
pub fn omega_distribution(x: u64) -> Result<Vec<u64>> {
    if x == 0 || x > OMEGA_SIEVE_LIMIT {
        return Err(Error::Domain(format!("x must lie in 1..={OMEGA_SIEVE_LIMIT}")));
    }
    let len = x as usize + 1;
    let mut big_omega = vec![0u8; len];
    // Every prime is reached before any of its multiples is touched, so an
    // untouched entry is prime.
    for p in 2..len {
        if big_omega[p] != 0 {
            continue;
        }
        let mut pk = p;
        loop {
            for m in (pk..len).step_by(pk) {
                big_omega[m] += 1;
            }
            match pk.checked_mul(p) {
                Some(v) if v < len => pk = v,
                _ => break,
            }
        }
    }
    let mut counts = Vec::new();
    for &k in &big_omega[1..] {
        let k = k as usize;
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }
    Ok(counts)
}

pub fn omega_distribution_table(x: u64, k_max: Option<usize>) -> Result<Table> {
    let counts = omega_distribution(x)?;
    let k_max = k_max.unwrap_or(counts.len() - 1);
    let mut t = Table::new(&["K", "count", "normalized"]);
    let ln_x = (x as f64).ln();
    for k in 0..=k_max {
        let c = counts.get(k).copied().unwrap_or(0);
        let norm = if k == 0 || x == 1 {
            String::new()
        } else {
            format!("{:.6}", c as f64 * 2f64.powi(k as i32) / (x as f64 * k as f64 * ln_x))
        };
        t.push(vec![k.to_string(), c.to_string(), norm]);
    }
    Ok(t)
}

/// Something to factor from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorTarget {
    Phi2(u64),
    Mersenne(u64, Sign),
    Integer(Natural),
}

impl FactorTarget {
    /// `phi2 D`, `m- N`, `m+ N` or a bare integer.
    pub fn parse(args: &[String]) -> Result<Self> {
        let index = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| Error::Domain(format!("bad index {s:?}")))
        };
        match args {
            [kind, v] if kind == "phi2" => Ok(FactorTarget::Phi2(index(v)?)),
            [kind, v] if kind == "m-" => Ok(FactorTarget::Mersenne(index(v)?, Sign::Minus)),
            [kind, v] if kind == "m+" => Ok(FactorTarget::Mersenne(index(v)?, Sign::Plus)),
            [v] => v
                .parse::<BigUint>()
                .ok()
                .filter(|n| *n >= BigUint::one())
                .map(FactorTarget::Integer)
                .ok_or_else(|| Error::Domain(format!("bad integer {v:?}"))),
            _ => Err(Error::domain("expected 'phi2 D', 'm- N', 'm+ N' or a positive integer")),
        }
    }
}

impl fmt::Display for FactorTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorTarget::Phi2(d) => write!(f, "Phi_{d}(2)"),
            FactorTarget::Mersenne(n, sign) => write!(f, "2^{n}{sign}1"),
            FactorTarget::Integer(n) => write!(f, "{n}"),
        }
    }
}

pub fn factor_target(ctx: &MersenneStats, target: &FactorTarget) -> Result<Factorization> {
    match target {
        FactorTarget::Phi2(d) => ctx.phi2_factorization(*d),
        FactorTarget::Mersenne(n, sign) => ctx.factor_mersenne(*n, *sign),
        FactorTarget::Integer(n) => factor(n, ctx.policy()),
    }
}

pub fn conjecture1_table(ctx: &MersenneStats, limit: u64) -> Result<Table> {
    let mut t = Table::new(&["N", "tau_plus_over_N", "exact"]);
    for (n, r) in ctx.conjecture1_table(limit)? {
        t.push(vec![n.to_string(), ratio_4dp(&r), exact(&r)]);
    }
    provenance(ctx, &mut t);
    Ok(t)
}

pub fn conjecture2_table(ctx: &MersenneStats, max_d: u64, c: f64) -> Result<Table> {
    let scan = ctx.conjecture2_scan(max_d, c)?;
    let mut t = Table::new(&["max_d", "c", "exceptions", "sup_ratio", "argmax_d"]);
    let ex: Vec<String> = scan.exceptions.iter().map(u64::to_string).collect();
    t.push(vec![
        max_d.to_string(),
        c.to_string(),
        ex.join(" "),
        real_4dp(scan.sup_ratio),
        scan.argmax_d.to_string(),
    ]);
    provenance(ctx, &mut t);
    Ok(t)
}

/// Tally for one invariant family.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub checked: u64,
    pub failed: Vec<u64>,
    pub skipped: Vec<u64>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

fn run_check(
    name: &'static str,
    range: impl IntoIterator<Item = u64>,
    mut check: impl FnMut(u64) -> Result<bool>,
) -> Result<CheckOutcome> {
    let mut out = CheckOutcome { name, ..Default::default() };
    for i in range {
        match check(i) {
            Ok(true) => out.checked += 1,
            Ok(false) => {
                out.checked += 1;
                out.failed.push(i);
            }
            Err(Error::Incomplete { .. } | Error::Budget { .. }) => out.skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs the finite identities and inequalities for indices up to `max`;
/// pieces that cannot be factored under the policy are skipped and listed.
pub fn check_invariants(ctx: &MersenneStats, max: u64, hcn_limit: u64) -> Result<Vec<CheckOutcome>> {
    let mut all: Vec<u64> = (1..=max).flat_map(|n| divisor_set(n, Sign::Minus).unwrap_or_default()).collect();
    all.extend((1..=max).flat_map(|n| divisor_set(n, Sign::Plus).unwrap_or_default()));
    ctx.prefetch(&all)?;
    let mut out = vec![
        run_check("product_identity", 1..=max, product_identity_check)?,
        run_check("phi2_below_3_pow_phi", 1..=max, |d| {
            Ok(phi2(d)? <= BigUint::from(3u32).pow(euler_phi(d)? as u32))
        })?,
        run_check("bang_exceptions", 1..=max, |m| {
            let exists = !primitive_part(m)?.is_one();
            Ok(exists != (m == 1 || m == 6))
        })?,
        run_check("assembly_reconstructs", 1..=max, |n| {
            let f = ctx.factor_mersenne(n, Sign::Minus)?;
            if !f.is_complete() {
                return Err(Error::Incomplete { what: String::new(), missing: vec![n] });
            }
            Ok(f.value() == mersenne_minus(n))
        })?,
        run_check("compare_lower_bound", 1..=max, |k| ctx.compare_lower_bound(k))?,
        run_check("tau_upper_bound", 2..=max, |n| ctx.tau_upper_bound_check(n))?,
        run_check("omega_decomposition", 1..=max, |n| Ok(ctx.omega_decomposition_check(n)?.holds()))?,
        run_check("plus_lower_bound", 1..=max, |n| ctx.theorem3_bound_check(n))?,
        run_check("tau_doubling", 1..=max / 2, |m| ctx.tau_doubling_check(m))?,
    ];
    let taus = ctx.tau_series(Sign::Minus, max);
    out.push(run_check("f_vs_f_prime", 1..=max, |n| {
        let taus = taus.as_ref().map_err(|_| Error::Incomplete { what: String::new(), missing: vec![n] })?;
        let f: Natural = taus[..n as usize].iter().sum();
        Ok(f * 4u32 >= f_prime_sum(n)?)
    })?);
    let hcns = enumerate_hcn(&BigUint::from(hcn_limit));
    out.push(run_check("hcn_tau_jump", 0..hcns.len() as u64, |i| {
        let rec = &hcns[i as usize];
        let n = rec.n.to_u64().ok_or(Error::Overflow("hcn"))?;
        let doubled = tau_small(2 * n)? - tau_small(n)?;
        Ok(BigUint::from(doubled) == tau_jump(rec))
    })?);
    Ok(out)
}

pub fn invariants_table(outcomes: &[CheckOutcome]) -> Table {
    let list = |v: &[u64]| v.iter().take(20).map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut t = Table::new(&["check", "status", "checked", "failed", "skipped"]);
    for o in outcomes {
        let status = if o.passed() { "pass" } else { "fail" };
        t.push(vec![o.name.to_string(), status.to_string(), o.checked.to_string(), list(&o.failed), list(&o.skipped)]);
    }
    t
}

/// Writes the store, creating an empty one when nothing is stored yet.
pub fn export_store(ctx: &MersenneStats, path: &Path) -> Result<usize> {
    let store = ctx.store();
    store.export_store_file(path)?;
    Ok(store.len())
}
