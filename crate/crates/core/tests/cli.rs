// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn offload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offload")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = offload(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no '{key}' in:\n{stdout}"))
        .trim()
}

fn gen(store: &Path, layout: &str, path: &str) {
    let s = store.to_str().unwrap();
    ok(&[
        "gen", "--store", s, "--path", path, "--layout", layout, "--rows", "6000", "--rows-per-group", "300",
        "--stripe-unit", "65536", "--nodes", "3",
    ]);
}

#[test]
fn offload_and_local_scans_agree() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().to_str().unwrap();
    gen(dir.path(), "striped", "t.rgf");
    gen(dir.path(), "split", "t");
    let mut counts = Vec::new();
    for (layout, path) in [("striped", "t.rgf"), ("split", "t")] {
        for mode in ["local", "offload"] {
            let out = ok(&[
                "scan", "--store", s, "--path", path, "--layout", layout, "--mode", mode, "--predicate", "driver<0.01",
                "--columns", "vendor,driver",
            ]);
            counts.push(field(&out, "rows:").parse::<usize>().unwrap());
        }
    }
    assert!(counts[0] > 0 && counts.iter().all(|&c| c == counts[0]), "{counts:?}");
}

#[test]
fn inspect_reports_aligned_row_groups() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "striped", "t.rgf");
    let out = ok(&["inspect", "--store", dir.path().to_str().unwrap(), "--path", "t.rgf"]);
    assert_eq!(field(&out, "total_rows:"), "6000");
    assert_eq!(field(&out, "row_groups:"), "20");
    let residues: Vec<&str> = out.lines().filter_map(|l| l.split("offset%stripe_unit ").nth(1)).collect();
    assert_eq!(residues.len(), 20);
    assert!(residues.iter().all(|r| *r == "0"), "{out}");
}

#[test]
fn bench_writes_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.conf");
    std::fs::write(&config, "rows = 3000\nrows_per_group = 300\nnode_counts = 2, 4\nselectivities = 0.1\n").unwrap();
    let csv = dir.path().join("out.csv");
    let out = ok(&[
        "bench", "--config", config.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--set", "layouts=split",
    ]);
    assert!(out.contains("wrote 4 rows"), "{out}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("mode,layout,selectivity,node_count"));
}

#[test]
fn usage_errors_exit_2_and_runtime_errors_exit_1() {
    assert_eq!(offload(&["scan", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(offload(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(offload(&["scan", "--store", "x", "--mode", "sideways"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "striped", "t.rgf");
    let s = dir.path().to_str().unwrap();
    let bad = offload(&["scan", "--store", s, "--path", "t.rgf", "--predicate", "nope = 1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
    assert_eq!(offload(&["inspect", "--store", s, "--path", "missing"]).status.code(), Some(1));
    assert_eq!(offload(&["bench", "--set", "rows"]).status.code(), Some(1));
}
