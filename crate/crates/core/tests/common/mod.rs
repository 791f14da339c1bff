#![allow(dead_code)]

use std::path::PathBuf;

/// (N, tau(2^N - 1), tau(2^N + 1)/N as printed) for the 30 record indices up to 1206.
pub const HCM_ROWS: [(u64, &str, &str); 30] = [
    (1, "1", "2"),
    (2, "2", "1"),
    (4, "4", "0.5"),
    (6, "6", "0.6667"),
    (8, "8", "0.25"),
    (12, "24", "0.3333"),
    (18, "32", "0.8889"),
    (20, "48", "0.2"),
    (24, "96", "0.3333"),
    (36, "512", "0.4444"),
    (48, "768", "0.1667"),
    (60, "4608", "0.2667"),
    (72, "8192", "0.4444"),
    (84, "9216", "0.3810"),
    (108, "10240", "0.5926"),
    (120, "73728", "0.5333"),
    (144, "262144", "0.8889"),
    (168, "294912", "1.5238"),
    (180, "6291456", "1.4222"),
    (288, "33554432", "0.4444"),
    (300, "100663296", "1.7067"),
    (360, "1610612736", "2.8444"),
    (420, "57982058496", "9.7524"),
    (540, "257698037760", "60.6815"),
    (660, "463856467968", "397.1879"),
    (720, "1649267441664", "45.5111"),
    (780, "1855425871872", "42.0103"),
    (840, "237494511599616", "624.1524"),
    (900, "281474976710656", "36.4089"),
    (1080, "8444249301319680", "242.7259"),
];

/// (d, omega(Phi_d(2)), omega / ln d as printed) for d <= 40.
pub const CYCLO_ROWS: [(u64, u64, &str); 40] = [
    (1, 0, ""),
    (2, 1, "1.4427"),
    (3, 1, "0.9102"),
    (4, 1, "0.7213"),
    (5, 1, "0.6213"),
    (6, 1, "0.5581"),
    (7, 1, "0.5139"),
    (8, 1, "0.4809"),
    (9, 1, "0.4551"),
    (10, 1, "0.4343"),
    (11, 2, "0.8341"),
    (12, 1, "0.4024"),
    (13, 1, "0.3899"),
    (14, 1, "0.3789"),
    (15, 1, "0.3693"),
    (16, 1, "0.3607"),
    (17, 1, "0.3530"),
    (18, 2, "0.6920"),
    (19, 1, "0.3396"),
    (20, 2, "0.6676"),
    (21, 2, "0.6569"),
    (22, 1, "0.3235"),
    (23, 2, "0.6379"),
    (24, 1, "0.3147"),
    (25, 2, "0.6213"),
    (26, 1, "0.3069"),
    (27, 1, "0.3034"),
    (28, 2, "0.6002"),
    (29, 3, "0.8909"),
    (30, 1, "0.2940"),
    (31, 1, "0.2912"),
    (32, 1, "0.2885"),
    (33, 1, "0.2860"),
    (34, 1, "0.2836"),
    (35, 2, "0.5625"),
    (36, 2, "0.5581"),
    (37, 2, "0.5539"),
    (38, 1, "0.2749"),
    (39, 2, "0.5459"),
    (40, 1, "0.2711"),
];

pub fn table1_csv(limit: u64) -> String {
    let mut s = String::from("N,tau_minus,tau_plus_over_N\n");
    for (n, t, r) in HCM_ROWS.iter().filter(|r| r.0 <= limit) {
        s.push_str(&format!("{n},{t},{r}\n"));
    }
    s
}

pub fn table2_csv() -> String {
    let mut s = String::from("d,omega,omega_over_log_d\n");
    for (d, w, r) in CYCLO_ROWS {
        s.push_str(&format!("{d},{w},{r}\n"));
    }
    s
}

/// Directory holding downloaded OEIS b-files: `$MDIV_DATA_DIR`, else `data/`
/// at the workspace root.
pub fn data_dir() -> PathBuf {
    std::env::var_os("MDIV_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Divisor count by trial division.
pub fn tau_brute(n: u64) -> u64 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

/// Prime factorization by trial division.
pub fn factor_brute(mut n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
