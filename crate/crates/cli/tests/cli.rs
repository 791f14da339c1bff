use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mersenne-divisors"));
    for var in ["MDIV_STORE", "MDIV_IMPORT", "MDIV_BUDGET_SECS", "MDIV_SEED", "MDIV_WORKERS", "MDIV_FORMAT", "MDIV_OUT", "MDIV_OFFLINE"] {
        c.env_remove(var);
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn factor_subcommand() {
    let o = run(&["factor", "phi2", "29"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "233 1103 2089\n");
    assert_eq!(stdout(&run(&["factor", "m-", "11"])), "23 89\n");
    assert_eq!(stdout(&run(&["factor", "m+", "6"])), "5 13\n");
    assert_eq!(stdout(&run(&["factor", "1000"])), "2^3 5^3\n");
}

#[test]
fn table2_head() {
    let o = run(&["table2", "--max-d", "3"]);
    assert_eq!(stdout(&o), "d,omega,omega_over_log_d\n1,0,\n2,1,1.4427\n3,1,0.9102\n");
}

#[test]
fn table1_single_row_and_tsv_from_env() {
    assert_eq!(stdout(&run(&["table1", "--limit", "1"])), "N,tau_minus,tau_plus_over_N\n1,1,2\n");
    let o = bin().args(["table1", "--limit", "2"]).env("MDIV_FORMAT", "tsv").output().unwrap();
    assert_eq!(stdout(&o), "N\ttau_minus\ttau_plus_over_N\n1\t1\t2\n2\t2\t1\n");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["log-sum", "0"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 1\n2 oops\n").unwrap();
    let spec = format!("tau-minus={}", bad.display());
    let o = run(&["table1", "--import", &spec]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    assert_eq!(run(&["figure1", "--max-n", "12", "--offline"]).status.code(), Some(4));
    assert_eq!(run(&["factor", "phi2", "137", "--budget-secs", "1"]).status.code(), Some(5));
}

#[test]
fn store_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.txt");
    let s = store.to_str().unwrap();
    let first = run(&["figure1", "--max-n", "24", "--store", s]);
    assert!(first.status.success());
    let text = fs::read_to_string(&store).unwrap();
    assert!(text.starts_with("# mersenne-divisors factor store v1\n"));
    assert!(text.contains("phi2 11 = 23 89\n"));
    // Offline runs succeed from the store alone.
    let second = run(&["figure1", "--max-n", "24", "--store", s, "--offline"]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn export_and_import() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    assert!(run(&["export", empty.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(&empty).unwrap(), "# mersenne-divisors factor store v1\n");

    let src = dir.path().join("src.txt");
    fs::write(&src, "# mersenne-divisors factor store v1\nphi2 11 = 23 89\nphi2 29 = 233 1103 2089\n").unwrap();
    let store = dir.path().join("store.txt");
    let o = run(&["import", src.to_str().unwrap(), "--store", store.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let merged = fs::read_to_string(&store).unwrap();
    assert!(merged.contains("phi2 29 = 233 1103 2089"));

    let out = dir.path().join("out.txt");
    let o = run(&["export", "--store", store.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), merged);
}

#[test]
fn imported_table_marks_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let fig = dir.path().join("fig1.csv");
    assert!(run(&["figure1", "--max-n", "30", "--out", fig.to_str().unwrap()]).status.success());
    let spec = format!("tau-minus={}", fig.display());
    let o = run(&["figure1", "--max-n", "30", "--offline", "--import", &spec]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# imported: tau-minus="));
    assert!(text.ends_with(&fs::read_to_string(&fig).unwrap()));
}

#[test]
fn data_commands() {
    let o = run(&["omega-dist", "10"]);
    assert!(stdout(&o).starts_with("K,count,normalized\n0,1,\n1,4,"));
    let o = run(&["log-sum", "1", "--digits", "10"]);
    assert!(stdout(&o).contains(",-0.6931471805,"));
    let o = run(&["figure2", "--max-n", "2"]);
    assert_eq!(stdout(&o), "n,ratio,ratio_exact\n1,3.0,3\n2,3.0,3\n");
    let o = run(&["hcn", "--limit", "12"]);
    assert!(stdout(&o).ends_with("12,6,0.946886,2 1\n"), "{}", stdout(&o));
    let o = run(&["check-conj1", "--limit", "8"]);
    assert!(stdout(&o).ends_with("8,0.25,1/4\n"));
    let o = run(&["check-invariants", "--max-n", "30", "--hcn-limit", "1000"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains(",fail,"));
}
