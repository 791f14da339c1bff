//! Persistent cache of factorizations and reader for published sequence tables.
//!
//! The store is one plain-text file, one record per line:
//!
//! ```text
//! # comment
//! phi2 11 = 23 89
//! phi2 360 = 37361 C:1937201...
//! m- 6 = 3^2 7
//! ```
//!
//! A trailing `?` marks a probable prime and `C:` a composite cofactor.
//! Every record is checked against the exact value of its key when it enters
//! the store.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cyclotomic::{mersenne_minus, mersenne_plus, phi2};
use crate::error::{Error, Result};
use crate::factorization::{
    is_probable_prime, Certainty, FactorPolicy, Factorization, Natural, Primality, PrimePower,
};

pub const STORE_HEADER: &str = "# mersenne-divisors factor store v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Phi2,
    MersenneMinus,
    MersennePlus,
}

impl Kind {
    pub fn token(self) -> &'static str {
        match self {
            Kind::Phi2 => "phi2",
            Kind::MersenneMinus => "m-",
            Kind::MersennePlus => "m+",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "phi2" => Ok(Kind::Phi2),
            "m-" => Ok(Kind::MersenneMinus),
            "m+" => Ok(Kind::MersennePlus),
            other => Err(format!("unknown record kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoreKey {
    pub kind: Kind,
    pub index: u64,
}

impl StoreKey {
    pub fn new(kind: Kind, index: u64) -> Result<Self> {
        if index == 0 {
            return Err(Error::domain("store index must be >= 1"));
        }
        Ok(StoreKey { kind, index })
    }

    pub fn phi2(d: u64) -> Self {
        StoreKey { kind: Kind::Phi2, index: d }
    }

    /// The integer this key stands for.
    pub fn value(&self) -> Result<Natural> {
        match self.kind {
            Kind::Phi2 => phi2(self.index),
            Kind::MersenneMinus => Ok(mersenne_minus(self.index)),
            Kind::MersennePlus => Ok(mersenne_plus(self.index)),
        }
    }
}

impl fmt::Display for StoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.token(), self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    Imported,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreRecord {
    pub key: StoreKey,
    pub factorization: Factorization,
    pub provenance: Provenance,
}

impl StoreRecord {
    pub fn new(key: StoreKey, factorization: Factorization, provenance: Provenance) -> Self {
        StoreRecord { key, factorization, provenance }
    }
}

/// Policy used to re-verify primes entering the store.
fn verification_policy() -> FactorPolicy {
    FactorPolicy { mr_rounds: 8, ..FactorPolicy::default() }
}

fn corruption(key: &StoreKey, message: impl Into<String>) -> Error {
    Error::Corruption { key: key.to_string(), message: message.into() }
}

/// In-memory view of the store file, ordered by key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactorStore {
    records: BTreeMap<StoreKey, StoreRecord>,
}

impl FactorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, key: &StoreKey) -> Option<&StoreRecord> {
        self.records.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StoreRecord> {
        self.records.values()
    }

    /// Inserts or merges a record.
    ///
    /// The incoming factorization must multiply to the key's value. When a
    /// record already exists, the union of known primes is kept and any
    /// cofactor is split as far as the two records allow; a complete record
    /// therefore always supersedes a partial one. Keys whose value is 1 have
    /// nothing to record and are ignored.
    pub fn upsert(&mut self, record: StoreRecord) -> Result<()> {
        let key = record.key;
        let value = key.value()?;
        if value.is_one() {
            return Ok(());
        }
        let incoming = validate(&key, &value, record.factorization)?;
        let merged = match self.records.get(&key) {
            None => incoming,
            Some(existing) => merge(&key, &value, &existing.factorization, &incoming)?,
        };
        let provenance = match self.records.get(&key) {
            Some(existing) if existing.factorization == merged => existing.provenance,
            _ => record.provenance,
        };
        self.records.insert(key, StoreRecord::new(key, merged, provenance));
        Ok(())
    }

    /// Parses store text, verifying and merging every record.
    pub fn parse(text: &str, provenance: Provenance) -> Result<Self> {
        let mut store = FactorStore::new();
        store.merge_text(text, provenance)?;
        Ok(store)
    }

    pub fn merge_text(&mut self, text: &str, provenance: Provenance) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            if let Some((key, f)) = parse_record_line(line, i + 1)? {
                self.upsert(StoreRecord::new(key, f, provenance))?;
            }
        }
        Ok(())
    }

    /// Reads a store file; a missing file is an empty store.
    pub fn load(path: &Path, provenance: Provenance) -> Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => Self::parse(&text, provenance).map_err(|e| e.with_path(path)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(FactorStore::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Merges the records of another store file into this one.
    pub fn import_store_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        self.merge_text(&text, Provenance::Imported)
            .map_err(|e| e.with_path(path))
    }

    pub fn render(&self) -> String {
        let mut out = String::from(STORE_HEADER);
        out.push('\n');
        for r in self.records.values() {
            out.push_str(&format!("{} = {}\n", r.key, r.factorization));
        }
        out
    }

    pub fn export_store_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Parses one store line; comments and blank lines yield `None`.
pub fn parse_record_line(line: &str, lineno: usize) -> Result<Option<(StoreKey, Factorization)>> {
    let line = line.trim_end_matches('\r');
    if line.trim().is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut tokens = line.split_whitespace();
    let kind: Kind = tokens
        .next()
        .unwrap()
        .parse()
        .map_err(|e: String| Error::parse(lineno, e))?;
    let index: u64 = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .filter(|&i| i >= 1)
        .ok_or_else(|| Error::parse(lineno, "expected a positive index"))?;
    if tokens.next() != Some("=") {
        return Err(Error::parse(lineno, "expected '=' after the index"));
    }
    let mut factors = Vec::new();
    let mut cofactor: Option<Natural> = None;
    for tok in tokens {
        if let Some(digits) = tok.strip_prefix("C:") {
            let c = parse_digits(digits, lineno)?;
            cofactor = Some(match cofactor {
                Some(prev) => prev * c,
                None => c,
            });
            continue;
        }
        let (body, certainty) = match tok.strip_suffix('?') {
            Some(b) => (b, Certainty::Probable),
            None => (tok, Certainty::Proven),
        };
        let (p, e) = match body.split_once('^') {
            Some((p, e)) => (
                parse_digits(p, lineno)?,
                e.parse::<u64>()
                    .ok()
                    .filter(|&e| e >= 1)
                    .ok_or_else(|| Error::parse(lineno, format!("bad exponent in {tok:?}")))?,
            ),
            None => (parse_digits(body, lineno)?, 1),
        };
        factors.push((p, PrimePower { exponent: e, certainty }));
    }
    if factors.is_empty() && cofactor.is_none() {
        return Err(Error::parse(lineno, "record lists no factors"));
    }
    let key = StoreKey { kind, index };
    let f = Factorization::from_parts(factors, cofactor).map_err(|e| Error::parse(lineno, e.to_string()))?;
    Ok(Some((key, f)))
}

fn parse_digits(s: &str, lineno: usize) -> Result<Natural> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(lineno, format!("expected decimal digits, found {s:?}")));
    }
    Ok(s.parse().expect("validated digits"))
}

fn validate(key: &StoreKey, value: &Natural, mut f: Factorization) -> Result<Factorization> {
    if &f.value() != value {
        return Err(corruption(key, "factors do not multiply to the key's value"));
    }
    let policy = verification_policy();
    for p in f.primes() {
        if is_probable_prime(p, &policy) == Primality::Composite {
            return Err(corruption(key, format!("listed factor {p} is composite")));
        }
    }
    f.normalize(&policy);
    Ok(f)
}

fn merge(key: &StoreKey, value: &Natural, a: &Factorization, b: &Factorization) -> Result<Factorization> {
    let mut certainty: BTreeMap<Natural, Certainty> = BTreeMap::new();
    for (p, pp) in a.factors().iter().chain(b.factors()) {
        let c = certainty.entry(p.clone()).or_insert(pp.certainty);
        *c = (*c).min(pp.certainty);
    }
    let mut rest = value.clone();
    let mut out = Factorization::one();
    for (p, c) in &certainty {
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e == 0 {
            return Err(corruption(key, format!("prime {p} does not divide the key's value")));
        }
        out.insert(p.clone(), e, *c);
    }
    // Split what is left along both cofactors.
    let mut pieces = vec![rest];
    for c in [a.cofactor(), b.cofactor()].into_iter().flatten() {
        pieces = pieces
            .into_iter()
            .flat_map(|piece| {
                let g = piece.gcd(c);
                if g.is_one() || g == piece {
                    vec![piece]
                } else {
                    let h = &piece / &g;
                    vec![g, h]
                }
            })
            .collect();
    }
    let policy = verification_policy();
    let mut cofactor = BigUint::one();
    for piece in pieces.into_iter().filter(|p| !p.is_one()) {
        match is_probable_prime(&piece, &policy) {
            Primality::Composite => cofactor *= piece,
            v => out.insert(piece, 1, v.into()),
        }
    }
    let mut merged = Factorization::from_parts(
        out.factors().iter().map(|(p, pp)| (p.clone(), *pp)),
        (!cofactor.is_one()).then_some(cofactor),
    )?;
    merged.normalize(&policy);
    if &merged.value() != value {
        return Err(corruption(key, "merged factorization does not reconstruct the value"));
    }
    Ok(merged)
}

/// Which published sequence a b-file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BFileKind {
    /// Number of divisors of `2^n - 1`.
    TauMersenneMinus,
    /// Number of divisors of `2^n + 1`.
    TauMersennePlus,
    /// Number of distinct prime factors of `Phi_d(2)`.
    OmegaPhi2,
}

impl BFileKind {
    pub fn name(self) -> &'static str {
        match self {
            BFileKind::TauMersenneMinus => "tau-minus",
            BFileKind::TauMersennePlus => "tau-plus",
            BFileKind::OmegaPhi2 => "omega-phi2",
        }
    }
}

impl FromStr for BFileKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tau-minus" => Ok(BFileKind::TauMersenneMinus),
            "tau-plus" => Ok(BFileKind::TauMersennePlus),
            "omega-phi2" => Ok(BFileKind::OmegaPhi2),
            other => Err(format!("unknown b-file kind {other:?}")),
        }
    }
}

/// A sequence table of `index value` lines with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BFile {
    entries: Vec<(u64, Natural)>,
}

impl BFile {
    pub fn from_entries(entries: Vec<(u64, Natural)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain("b-file indices must be strictly increasing"));
        }
        Ok(BFile { entries })
    }

    /// Parses `index value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, false)
    }

    /// Parses a two-or-more column CSV with a header row, reading the first
    /// two columns as index and value.
    pub fn parse_csv(text: &str) -> Result<Self> {
        Self::parse_with(text, true)
    }

    fn parse_with(text: &str, csv: bool) -> Result<Self> {
        let mut entries: Vec<(u64, Natural)> = Vec::new();
        let mut header_pending = csv;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if header_pending {
                header_pending = false;
                continue;
            }
            let mut fields: Vec<&str> = if csv {
                line.split([',', '\t']).collect()
            } else {
                line.split_whitespace().collect()
            };
            if !csv && fields.len() != 2 {
                return Err(Error::parse(lineno, format!("expected 'index value', found {line:?}")));
            }
            if fields.len() < 2 {
                return Err(Error::parse(lineno, format!("expected at least two columns, found {line:?}")));
            }
            fields.truncate(2);
            let index: u64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index {:?}", fields[0])))?;
            let value = parse_digits(fields[1], lineno)?;
            if let Some(&(prev, _)) = entries.last() {
                if index <= prev {
                    return Err(Error::parse(
                        lineno,
                        format!("index {index} does not increase (previous {prev})"),
                    ));
                }
            }
            entries.push((index, value));
        }
        Ok(BFile { entries })
    }

    /// Reads a b-file, or a CSV/TSV table when the data lines contain
    /// commas or tabs.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let tabular = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .is_some_and(|l| l.contains([',', '\t']));
        let parsed = if tabular { Self::parse_csv(&text) } else { Self::parse(&text) };
        parsed.map_err(|e| e.with_path(path))
    }

    pub fn entries(&self) -> &[(u64, Natural)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn get(&self, index: u64) -> Option<&Natural> {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .ok()
            .map(|pos| &self.entries[pos].1)
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(i, v)| format!("{i} {v}\n"))
            .collect()
    }
}

/// Parses a b-file of the given kind from disk, checking values fit the kind.
pub fn import_bfile(kind: BFileKind, path: &Path) -> Result<BFile> {
    let b = BFile::load(path)?;
    for (i, v) in b.entries() {
        let ok = match kind {
            BFileKind::TauMersenneMinus | BFileKind::TauMersennePlus => *i == 0 || !v.is_zero(),
            BFileKind::OmegaPhi2 => v.bits() <= 64,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "{}: value {v} at index {i} is impossible for a {} table",
                path.display(),
                kind.name()
            )));
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key11() -> StoreKey {
        StoreKey::phi2(11)
    }

    fn parsed(line: &str) -> Factorization {
        parse_record_line(line, 1).unwrap().unwrap().1
    }

    #[test]
    fn parse_complete_and_partial_records() {
        let (key, f) = parse_record_line("phi2 11 = 23 89", 1).unwrap().unwrap();
        assert_eq!(key, key11());
        assert!(f.is_complete());
        let f = parsed("phi2 360 = 37361 C:1937201");
        assert!(!f.is_complete());
        let f = parsed("m- 6 = 3^2 7");
        assert_eq!(f.exponent(&BigUint::from(3u32)), 2);
        let f = parsed("phi2 89 = 618970019642690137449562111?");
        assert!(f.has_probable_primes());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = FactorStore::parse("# ok\nphi2 11 = 23 89\nphi3 4 = 5\n", Provenance::Imported).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        for bad in ["phi2 0 = 1", "phi2 11 23 89", "phi2 11 =", "phi2 11 = 23^ 89", "phi2 11 = 2x3"] {
            assert!(parse_record_line(bad, 7).is_err(), "{bad}");
        }
    }

    #[test]
    fn empty_and_comment_only_files() {
        assert!(FactorStore::parse("", Provenance::Imported).unwrap().is_empty());
        assert!(FactorStore::parse("# nothing\n\n", Provenance::Imported).unwrap().is_empty());
        assert_eq!(FactorStore::new().render(), format!("{STORE_HEADER}\n"));
    }

    #[test]
    fn get_absent_key() {
        assert!(FactorStore::new().get(&key11()).is_none());
    }

    #[test]
    fn partial_then_split_becomes_complete() {
        let mut store = FactorStore::new();
        let partial = Factorization::from_parts(
            [(BigUint::from(23u32), PrimePower { exponent: 1, certainty: Certainty::Proven })],
            Some(BigUint::from(89u32)),
        )
        .unwrap();
        store.upsert(StoreRecord::new(key11(), partial, Provenance::Computed)).unwrap();
        store.upsert(StoreRecord::new(key11(), parsed("phi2 11 = 23 89"), Provenance::Imported)).unwrap();
        let rec = store.get(&key11()).unwrap();
        assert!(rec.factorization.is_complete());
        assert_eq!(rec.factorization.to_string(), "23 89");
    }

    #[test]
    fn merge_splits_composite_cofactors() {
        // Phi_29(2) = 233 * 1103 * 2089.
        let key = StoreKey::phi2(29);
        let a = parsed("phi2 29 = 233 C:2304167");
        let b = parsed("phi2 29 = 1103 C:486737");
        let mut store = FactorStore::new();
        store.upsert(StoreRecord::new(key, a, Provenance::Imported)).unwrap();
        assert!(!store.get(&key).unwrap().factorization.is_complete());
        store.upsert(StoreRecord::new(key, b, Provenance::Imported)).unwrap();
        assert_eq!(store.get(&key).unwrap().factorization.to_string(), "233 1103 2089");
        // A weaker record afterwards does not lose anything.
        store
            .upsert(StoreRecord::new(key, parsed("phi2 29 = C:536870911"), Provenance::Imported))
            .unwrap();
        assert_eq!(store.get(&key).unwrap().factorization.to_string(), "233 1103 2089");
    }

    #[test]
    fn wrong_product_is_rejected() {
        let mut store = FactorStore::new();
        let err = store
            .upsert(StoreRecord::new(key11(), parsed("phi2 11 = 23 83"), Provenance::Imported))
            .unwrap_err();
        assert!(matches!(&err, Error::Corruption { key, .. } if key == "phi2 11"), "{err}");
        assert!(parse_record_line("phi2 11 = C:2047 1", 1).is_err());
        assert!(store.get(&key11()).is_none());
    }

    #[test]
    fn composite_listed_as_prime_is_rejected() {
        let mut store = FactorStore::new();
        let err = store
            .upsert(StoreRecord::new(StoreKey::phi2(11), parsed("phi2 11 = 2047"), Provenance::Imported))
            .unwrap_err();
        assert!(matches!(err, Error::Corruption { .. }));
    }

    #[test]
    fn export_is_key_ordered_and_round_trips() {
        let text = "m+ 6 = 5 13\nphi2 29 = 2089 233 1103\nphi2 11 = 89 23\nm- 6 = 7 3^2\n";
        let store = FactorStore::parse(text, Provenance::Imported).unwrap();
        let out = store.render();
        assert_eq!(
            out,
            format!("{STORE_HEADER}\nphi2 11 = 23 89\nphi2 29 = 233 1103 2089\nm- 6 = 3^2 7\nm+ 6 = 5 13\n")
        );
        let again = FactorStore::parse(&out, Provenance::Imported).unwrap();
        assert_eq!(again.render(), out);
    }

    #[test]
    fn bfile_parsing() {
        let b = BFile::parse("# tau(2^n-1)\n1 1\n2 2\n4 4\n").unwrap();
        assert_eq!(b.get(4), Some(&BigUint::from(4u32)));
        assert_eq!(b.get(3), None);
        assert!(BFile::parse("# only comments\n").unwrap().is_empty());
        let err = BFile::parse("1 1\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = BFile::parse("1 1\nfoo\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let omega = BFile::parse("29 3\n").unwrap();
        assert_eq!(omega.get(29), Some(&BigUint::from(3u32)));
    }

    #[test]
    fn csv_series_parse() {
        let b = BFile::parse_csv("n,tau\n1,1\n2,2\n").unwrap();
        assert_eq!(b.entries().len(), 2);
        assert_eq!(b.max_index(), Some(2));
    }
}
