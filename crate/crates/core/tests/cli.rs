use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use kwidth::entropy::ksigma_inner_entropy;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kwidth"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .status()
        .expect("spawn kwidth");
    status.code().expect("exit code")
}

const SMALL: &str = r#"
seed = 11

[experiment.ks]
kind = "ksigma-reproduce"
alpha = 1.0
n = [1, 10]

[experiment.widths]
kind = "nonlinear-width"
set = { type = "random", count = 7, dim = 3, instances = 2 }
n = [1, 1]
N = [2]

[experiment.lip]
kind = "lipschitz"
set = { type = "random", count = 6, dim = 2 }
n = [1, 1]
N = [2]
pairs = 4096

[experiment.mterm]
kind = "mterm"
J = 32
n_k = 4
a2 = 2.0
m = [2, 4]
sets = 5
"#;

#[test]
fn ksigma_reproduce_rows_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SMALL).unwrap();
    assert_eq!(run(&cfg, &dir.path().join("out"), &["--jobs", "1"]), 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("out/results.csv")).unwrap();
    let mut seen = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[0] == "ks" && &rec[4] == "inner_entropy_closed_form" {
            let n: u32 = rec[2].parse().unwrap();
            let v: f64 = rec[5].parse().unwrap();
            assert_eq!(v, ksigma_inner_entropy(1.0, n));
            assert!(rec[10].is_empty());
            seen += 1;
        }
        if &rec[0] == "widths" {
            assert!(!rec[10].is_empty(), "stochastic rows carry a seed");
        }
    }
    assert_eq!(seen, 10);
    let text = fs::read_to_string(dir.path().join("out/verdicts.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for item in v.as_array().unwrap() {
        let mut keys: Vec<&str> = item.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["check", "details", "status", "window", "witness"]);
    }
    let first = text.find("\"check\"").unwrap();
    assert!(first < text.find("\"status\"").unwrap() && text.find("\"status\"").unwrap() < text.find("\"details\"").unwrap());
}

#[test]
fn reruns_are_byte_identical_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a, &["--jobs", "1"]), 0);
    assert_eq!(run(&cfg, &b, &["--jobs", "3"]), 0);
    for f in ["results.csv", "verdicts.json", "ks_ksigma_alpha_1__inner_entropy_closed_form.dat"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    assert_eq!(run(&cfg, &c, &["--seed", "12"]), 0);
    assert_ne!(fs::read(a.join("results.csv")).unwrap(), fs::read(c.join("results.csv")).unwrap());
}

#[test]
fn violated_fixture_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&fixture("violated_carl.toml"), dir.path(), &[]), 2);
    let text = fs::read_to_string(dir.path().join("verdicts.json")).unwrap();
    assert!(text.contains("\"violated\""));
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&fixture("empty_grid.toml"), dir.path(), &[]), 1);
    assert_eq!(run(&dir.path().join("missing.toml"), dir.path(), &[]), 1);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[experiment.a]\nkind = \"entropy\"\nset = { type = \"ksigma\", alpha = 1.0, truncation = 4 }\nn = [1, 2]\ncolour = 1\n")
        .unwrap();
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("colour") && msg.contains("line"), "{msg}");
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(1));
}
