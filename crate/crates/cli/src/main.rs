use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mersenne_divisors::experiments::{
    self, check_invariants, conjecture1_table, conjecture2_table, factor_target, figure1, figure2, figure3,
    hcn_table, invariants_table, log_sum_table, omega_distribution_table, table1, table2, FactorTarget,
    ImportKind, ImportSpec, OutputFormat, RunConfig, Table,
};
use mersenne_divisors::store::{import_bfile, FactorStore, Provenance};
use mersenne_divisors::{Error, FactorPolicy, Natural};

/// Divisor statistics of 2^n - 1 and 2^n + 1 from their cyclotomic factors.
#[derive(Debug, Parser)]
#[command(name = "mersenne-divisors", version)]
struct Cli {
    /// Factor store file, read at start and updated with new factorizations.
    #[arg(long, global = true, env = "MDIV_STORE")]
    store: Option<PathBuf>,

    /// Extra data: KIND=PATH with KIND one of tau-minus, tau-plus, omega-phi2, store;
    /// OEIS b-file names (b046801, b046798, b085021) are recognized without KIND.
    #[arg(long = "import", global = true, env = "MDIV_IMPORT", value_delimiter = ',')]
    imports: Vec<String>,

    /// Wall-clock seconds allowed per factoring job (0 for no limit).
    #[arg(long, global = true, env = "MDIV_BUDGET_SECS", default_value_t = 60)]
    budget_secs: u64,

    #[arg(long, global = true, env = "MDIV_SEED", default_value_t = 1)]
    seed: u64,

    /// Parallel factoring threads (0 for one per core).
    #[arg(long, global = true, env = "MDIV_WORKERS", default_value_t = 0)]
    workers: usize,

    /// Never factor: use only the store and imported tables.
    #[arg(long, global = true, env = "MDIV_OFFLINE")]
    offline: bool,

    #[arg(long, global = true, env = "MDIV_FORMAT", default_value = "csv")]
    format: OutputFormat,

    /// Write the table here instead of stdout.
    #[arg(long, global = true, env = "MDIV_OUT")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Record indices of tau(2^N - 1) with tau(2^N + 1)/N.
    Table1 {
        #[arg(long, default_value_t = 120)]
        limit: u64,
    },
    /// omega(Phi_d(2)) and omega/ln d.
    Table2 {
        #[arg(long, default_value_t = 40)]
        max_d: u64,
    },
    /// tau(2^n - 1) for n <= max-n.
    Figure1 {
        #[arg(long, default_value_t = 100)]
        max_n: u64,
    },
    /// f(2n)/f(n) for n <= max-n.
    Figure2 {
        #[arg(long, default_value_t = 50)]
        max_n: u64,
    },
    /// omega(Phi_d(2)) for d <= max-d.
    Figure3 {
        #[arg(long, default_value_t = 40)]
        max_d: u64,
    },
    /// Highly composite numbers up to a limit with their divisor-count exponent.
    Hcn {
        #[arg(long, default_value = "100000000")]
        limit: Natural,
    },
    /// sum_{k<=n} ln(2^k - 1) against n(n+1) ln 2 / 2.
    LogSum {
        n: u64,
        #[arg(long, default_value_t = 50)]
        digits: usize,
    },
    /// Counts of n <= x by number of prime factors with multiplicity.
    OmegaDist {
        x: u64,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Factor `phi2 D`, `m- N`, `m+ N` or an integer.
    Factor {
        #[arg(required = true, num_args = 1..=2)]
        target: Vec<String>,
    },
    /// Merge store files into --store, or validate sequence tables.
    Import {
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Write the store (with any imported store files) to PATH or --out.
    Export { path: Option<PathBuf> },
    /// tau(2^N + 1)/N over record indices up to limit.
    CheckConj1 {
        #[arg(long, default_value_t = 120)]
        limit: u64,
    },
    /// Scan omega(Phi_d(2)) <= c ln d for 2 <= d <= max-d.
    CheckConj2 {
        #[arg(long, default_value_t = 40)]
        max_d: u64,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
    },
    /// Run the finite identities and inequalities.
    CheckInvariants {
        #[arg(long, default_value_t = 100)]
        max_n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        hcn_limit: u64,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_INCOMPLETE: u8 = 4;
const EXIT_BUDGET: u8 = 5;

/// A partial factorization printed in full before exiting with the budget code.
#[derive(Debug)]
struct PartialResult;

impl std::fmt::Display for PartialResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "factorization incomplete within the budget")
    }
}

impl std::error::Error for PartialResult {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<PartialResult>().is_some() {
        return EXIT_BUDGET;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => EXIT_PARSE,
        Some(Error::Incomplete { .. }) => EXIT_INCOMPLETE,
        Some(Error::Budget { .. }) => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

fn config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let imports = cli
        .imports
        .iter()
        .map(|s| ImportSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let policy = FactorPolicy {
        rng_seed: cli.seed,
        time_budget: (cli.budget_secs > 0).then(|| Duration::from_secs(cli.budget_secs)),
        ..FactorPolicy::default()
    };
    Ok(RunConfig {
        store_path: cli.store.clone(),
        imports,
        policy,
        workers: cli.workers,
        offline: cli.offline,
        output_format: cli.format,
        out_path: cli.out.clone(),
    })
}

fn emit(cfg: &RunConfig, table: &Table) -> anyhow::Result<()> {
    if let Some(text) = cfg.emit(table)? {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = config(&cli)?;
    match &cli.command {
        Command::LogSum { n, digits } => return emit(&cfg, &log_sum_table(*n, *digits)?),
        Command::OmegaDist { x, k_max } => return emit(&cfg, &omega_distribution_table(*x, *k_max)?),
        Command::Hcn { limit } => return emit(&cfg, &hcn_table(limit)),
        Command::Import { paths } => return import(&cfg, paths),
        _ => {}
    }

    let ctx = cfg.open()?;
    let outcome = match &cli.command {
        Command::Table1 { limit } => table1(&ctx, *limit).map(|t| emit(&cfg, &t)),
        Command::Table2 { max_d } => table2(&ctx, *max_d).map(|t| emit(&cfg, &t)),
        Command::Figure1 { max_n } => figure1(&ctx, *max_n).map(|t| emit(&cfg, &t)),
        Command::Figure2 { max_n } => figure2(&ctx, *max_n).map(|t| emit(&cfg, &t)),
        Command::Figure3 { max_d } => figure3(&ctx, *max_d).map(|t| emit(&cfg, &t)),
        Command::CheckConj1 { limit } => conjecture1_table(&ctx, *limit).map(|t| emit(&cfg, &t)),
        Command::CheckConj2 { max_d, c } => conjecture2_table(&ctx, *max_d, *c).map(|t| emit(&cfg, &t)),
        Command::CheckInvariants { max_n, hcn_limit } => check_invariants(&ctx, *max_n, *hcn_limit).map(|o| {
            emit(&cfg, &invariants_table(&o))?;
            let failed: Vec<&str> = o.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                bail!("invariant checks failed: {}", failed.join(", "))
            }
        }),
        Command::Factor { target } => {
            let target = FactorTarget::parse(target)?;
            let start = Instant::now();
            eprintln!("factoring {target} (budget {}s per job)", cli.budget_secs);
            factor_target(&ctx, &target).map(|f| {
                eprintln!(
                    "{} after {:.2?}",
                    if f.is_complete() { "complete" } else { "partial" },
                    start.elapsed()
                );
                println!("{f}");
                if f.is_complete() {
                    Ok(())
                } else {
                    Err(PartialResult.into())
                }
            })
        }
        Command::Export { path } => {
            let path = path
                .clone()
                .or_else(|| cfg.out_path.clone())
                .context("export needs a PATH argument or --out")?;
            experiments::export_store(&ctx, &path).map(|n| {
                eprintln!("wrote {n} records to {}", path.display());
                Ok(())
            })
        }
        Command::LogSum { .. } | Command::OmegaDist { .. } | Command::Hcn { .. } | Command::Import { .. } => {
            unreachable!()
        }
    };
    // Keep whatever was factored even when the command itself failed.
    cfg.save(&ctx)?;
    outcome??;
    Ok(())
}

fn import(cfg: &RunConfig, paths: &[String]) -> anyhow::Result<()> {
    let specs = paths
        .iter()
        .map(|s| ImportSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut store: Option<FactorStore> = None;
    for spec in specs {
        match spec.kind {
            ImportKind::Table(kind) => {
                let t = import_bfile(kind, &spec.path)?;
                eprintln!(
                    "{}: {} entries up to index {} (pass it with --import to use it)",
                    spec,
                    t.entries().len(),
                    t.max_index().unwrap_or(0)
                );
            }
            ImportKind::Store => {
                let Some(target) = &cfg.store_path else {
                    bail!("importing a store file needs --store");
                };
                let s = store.get_or_insert(FactorStore::load(target, Provenance::Computed)?);
                let before = s.len();
                s.import_store_file(&spec.path)?;
                eprintln!("{}: merged, store now has {} records (was {before})", spec, s.len());
            }
        }
    }
    if let (Some(s), Some(path)) = (store, &cfg.store_path) {
        s.export_store_file(path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
