use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use slp::io::{format_edge_list, format_labels, parse_signal};
use slp::{EmpiricalGraph, SamplingSet};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("slp").chain(args.iter().copied());
    let code = slp::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn chain_fixture(dir: &TempDir, n: usize) -> (PathBuf, PathBuf) {
    let edges: Vec<_> = (0..n - 1)
        .map(|i| (i, i + 1, 1.0 / (i + 1) as f64))
        .collect();
    let g = EmpiricalGraph::build(&edges).unwrap();
    let s = SamplingSet::new([(0, 1.0), (n - 1, 0.0)]).unwrap();
    (
        write(dir, "graph.tsv", &format_edge_list(&g)),
        write(dir, "labels.tsv", &format_labels(&s)),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tv_of_output(text: &str, n: usize) -> f64 {
    let x = parse_signal(text).unwrap();
    (0..n - 1)
        .map(|i| (x[i] - x[i + 1]).abs() / (i + 1) as f64)
        .sum()
}

#[test]
fn solve_chain_of_four() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 4);
    let (code, out, err) = run(&[
        "solve",
        "--graph",
        s(&g),
        "--labels",
        s(&l),
        "--iters",
        "10000000",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 4);
    assert!((tv_of_output(&out, 4) - 1.0 / 3.0).abs() <= 1e-6);
}

#[test]
fn solve_writes_trace_certificate_and_manifest() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 6);
    let out_p = dir.path().join("x.tsv");
    let trace = dir.path().join("trace.jsonl");
    let cert = dir.path().join("cert.json");
    let manifest = dir.path().join("manifest.json");
    let (code, stdout, err) = run(&[
        "solve",
        "--graph",
        s(&g),
        "--labels",
        s(&l),
        "--iters",
        "500",
        "--trace",
        s(&trace),
        "--trace-stride",
        "100",
        "--certificate",
        s(&cert),
        "--output",
        s(&out_p),
        "--manifest",
        s(&manifest),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.is_empty());
    let lines: Vec<serde_json::Value> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    for key in ["k", "tv_iterate", "tv_average", "bound", "gap", "residual"] {
        assert!(lines[0].get(key).is_some(), "missing {key}");
    }
    let c: slp::certificates::Certificate =
        serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c.k, 500);
    assert_eq!(c.reference, slp::certificates::ReferenceKind::LongRun);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["algorithm"], "slp");
    assert_eq!(m["iters"], 500);
    assert_eq!(
        parse_signal(&fs::read_to_string(&out_p).unwrap())
            .unwrap()
            .len(),
        6
    );
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 30);
    let a = run(&["solve", "--graph", s(&g), "--labels", s(&l)]);
    let b = run(&["solve", "--graph", s(&g), "--labels", s(&l)]);
    let c = run(&[
        "solve",
        "--graph",
        s(&g),
        "--labels",
        s(&l),
        "--algorithm",
        "slp-mp",
    ]);
    assert_eq!(a, b);
    assert_eq!(a.1, c.1);
}

#[test]
fn message_passing_writes_round_stats() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 5);
    let rounds = dir.path().join("rounds.jsonl");
    let (code, _, err) = run(&[
        "solve",
        "--graph",
        s(&g),
        "--labels",
        s(&l),
        "--algorithm",
        "slp-mp",
        "--iters",
        "7",
        "--rounds",
        s(&rounds),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&rounds).unwrap();
    assert_eq!(text.lines().count(), 7);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["messages"], 8);
}

#[test]
fn label_propagation_algorithm() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.tsv", "0\t1\t1\n1\t2\t1\n");
    let l = write(&dir, "l.tsv", "0\t1\n2\t0\n");
    let (code, out, _) = run(&[
        "solve",
        "--graph",
        s(&g),
        "--labels",
        s(&l),
        "--algorithm",
        "lp",
        "--iters",
        "1000",
    ]);
    assert_eq!(code, 0);
    let x = parse_signal(&out).unwrap();
    assert!((x[1] - 0.5).abs() <= 1e-12);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 4);
    let missing = dir.path().join("nope.tsv");
    assert_eq!(
        run(&["solve", "--graph", s(&g), "--labels", s(&missing)]).0,
        1
    );

    let bad = write(&dir, "bad.tsv", "0\t1\t1\n1\tx\t1\n");
    let (code, _, err) = run(&["solve", "--graph", s(&bad), "--labels", s(&l)]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");

    let far = write(&dir, "far.tsv", "9\t1\n");
    assert_eq!(run(&["solve", "--graph", s(&g), "--labels", s(&far)]).0, 2);

    let neg = write(&dir, "neg.tsv", "# weights\n0\t1\t1\n1\t2\t-1\n");
    let (code, _, err) = run(&["solve", "--graph", s(&neg), "--labels", s(&l)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 3"), "{err}");

    let disconnected = write(&dir, "disc.tsv", "0\t1\t1\n2\t3\t1\n");
    assert_eq!(run(&["certify", "--graph", s(&disconnected)]).0, 2);

    assert_eq!(run(&["solve", "--graph", s(&g)]).0, 64);
    assert_eq!(
        run(&["solve", "--graph", s(&g), "--labels", s(&l), "--iters", "0"]).0,
        64
    );
}

#[test]
fn bench_chain_usage_and_output() {
    assert_eq!(run(&["bench-chain", "--n", "2"]).0, 64);
    assert_eq!(run(&["bench-chain", "--n", "10", "--grid", "5,10"]).0, 64);
    assert_eq!(run(&["bench-chain", "--n", "50", "--grid", "1"]).0, 4);

    let dir = TempDir::new().unwrap();
    let json = dir.path().join("report.json");
    let (code, out, err) = run(&["bench-chain", "--n", "100", "--json", s(&json)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().last().unwrap().starts_with("slope"));
    let report: slp::bench::RateReport =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.ks(), vec![10, 20, 50]);
    assert_eq!(report.violations(), 0);
}

#[test]
fn certify_reports_kappa() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.tsv", "0\t1\t1\n");
    let (code, out, _) = run(&["certify", "--graph", s(&g)]);
    assert_eq!(code, 0);
    let kappa: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("kappa\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((kappa - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
    assert!(out.contains("nodes\t2\n") && out.contains("edges\t1\n"));
}

#[test]
fn binary_exit_status() {
    let dir = TempDir::new().unwrap();
    let (g, l) = chain_fixture(&dir, 4);
    let bin = env!("CARGO_BIN_EXE_slp");
    let ok = Command::new(bin)
        .args([
            "solve",
            "--graph",
            s(&g),
            "--labels",
            s(&l),
            "--iters",
            "100",
        ])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert_eq!(ok.stdout.iter().filter(|&&b| b == b'\n').count(), 4);
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(64));
}
