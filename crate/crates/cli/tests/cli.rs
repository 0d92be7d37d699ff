//! End-to-end runs of the binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn necorpia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_necorpia")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn demo_matches_golden_report() {
    let o = necorpia(&["demo", "--nv", "2", "--L", "50,50", "--g", "30", "--Lh", "16", "--seed", "7"]);
    assert!(o.status.success());
    let golden = include_str!("golden/demo_nv2_g30_seed7.txt");
    assert_eq!(stdout(&o), golden);
    assert!(golden.contains("recovered: 30 (30 of 30 sources, 0 phantoms)"));
}

#[test]
fn empty_generation_is_a_usage_error() {
    let o = necorpia(&["demo", "--g", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--g"));
}

#[test]
fn single_packet_takes_fast_path() {
    let o = necorpia(&["demo", "--nv", "1", "--L", "100", "--g", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("fast path: yes"));
    assert!(s.contains("recovered: 1 (1 of 1 sources"));
    assert!(s.contains("seed: 1 (default)"));
}

#[test]
fn exit_codes() {
    assert_eq!(necorpia(&["demo", "--nv", "2", "--L", "5"]).status.code(), Some(1));
    assert_eq!(necorpia(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(necorpia(&["--help"]).status.code(), Some(0));
    assert_eq!(necorpia(&["analyze", "--nv", "3"]).status.code(), Some(1));
    assert_eq!(necorpia(&["verify", "--trials", "40", "--mc-trials", "2000"]).status.code(), Some(0));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn assert_finite(rows: &[Vec<String>], numeric_from: usize) {
    for row in rows {
        for cell in &row[numeric_from..] {
            if cell.is_empty() {
                continue;
            }
            let x: f64 = cell.parse().unwrap_or_else(|_| panic!("not a number: {cell}"));
            assert!(x.is_finite());
        }
    }
}

#[test]
fn analyze_and_bench_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(necorpia(&["analyze", "--nv", "1", "--g", "5,10", "--trials", "200", "--out", out]).status.success());
    let (h, rows) = read_csv(&dir.path().join("rank_pmf.csv"));
    assert_eq!(h, ["g", "rho_1", "rho_2", "analytic", "empirical"]);
    assert_finite(&rows, 0);
    for g in ["5", "10"] {
        let mass: f64 = rows.iter().filter(|r| r[0] == g).map(|r| r[3].parse::<f64>().unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }
    let (h, rows) = read_csv(&dir.path().join("expectations.csv"));
    assert_eq!(h, ["g", "source", "e_nb_terminal", "e_nb_total", "error_bound", "ratio_sle", "ratio_lut"]);
    assert_eq!(rows.len(), 4);
    assert_finite(&rows, 2);

    assert!(necorpia(&["bench", "--nv", "2", "--g", "10", "--trials", "20", "--out", out]).status.success());
    let (h, rows) = read_csv(&dir.path().join("bench.csv"));
    assert_eq!(h[0..3], ["g", "variant", "trials"]);
    assert_eq!(rows.len(), 2);
    assert_finite(&rows, 2);
    assert!(rows.iter().all(|r| r[7] == "0"), "instrumented counts above formula");
}

#[test]
fn simulate_schema_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.conf");
    fs::write(&cfg, "# small sweep\ng = 4,10\ntopologies = 2\nseed = 3\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = necorpia(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("seed: 3"));
    let (h, rows) = read_csv(&dir.path().join("headers.csv"));
    assert_eq!(h, ["g", "scheme", "avg_header_bits", "avg_header_bits_entropy_coded"]);
    assert_eq!(rows.len(), 10);
    assert_finite(&rows, 2);
    let (h, rows) = read_csv(&dir.path().join("nonzero.csv"));
    assert_eq!(h, ["g", "avg_nonzero_coeffs"]);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["4", "10"]);
    assert_finite(&rows, 0);
}
