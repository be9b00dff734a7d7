use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use social_sampling::Graph;

const CONFIG: &str = "\
name     = small
topology = grid 3 3
initial  = explicit 0.5 0.3 0.2
variant  = censored_exchange
schedule = harmonic 1
horizon  = 500
trials   = 4
seed     = 9
";

fn socsamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socsamp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("small.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = socsamp(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--per-trial"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["small.csv", "small.summary.json", "small.trials/trial_0003.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("small.csv")).unwrap();
    assert!(csv.starts_with("t,mse_mean,mse_stderr,disagreement_mean,mass_drift_max\n"));
    assert!(csv.lines().last().unwrap().starts_with("500,"));
}

#[test]
fn run_without_out_writes_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let o = socsamp(&["run", "--config", &cfg, "--trials", "1", "--horizon", "20", "--stride", "5"]);
    assert!(o.status.success());
    let rounds: Vec<String> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(rounds, ["0", "5", "10", "15", "20"]);
}

#[test]
fn check_on_default_config_exits_zero() {
    let o = socsamp(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("horizon  = 500", "horizon  = soon"));
    let o = socsamp(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 6"), "{err}");
    assert!(err.contains("horizon"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{CONFIG}colour = blue\n"));
    let o = socsamp(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("colour"));
}

#[test]
fn graph_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let o = socsamp(&["graph", "--topology", "grid 4 5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let g = Graph::from_edge_list_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g.node_count(), 20);
    assert_eq!(g.edge_count(), 31);
}

#[test]
fn graph_from_config_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("grid 3 3", "erdos_renyi 20 0.3"));
    let a = socsamp(&["graph", "--config", &cfg, "--seed", "5", "--trial", "2"]);
    let b = socsamp(&["graph", "--config", &cfg, "--seed", "5", "--trial", "2"]);
    let c = socsamp(&["graph", "--config", &cfg, "--seed", "5", "--trial", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_writes_one_file_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}sweep    = schedule: harmonic 1 | square 1\n", CONFIG.replace("horizon  = 500", "horizon  = 50"));
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("o");
    let o = socsamp(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("small_00.csv").exists());
    assert!(out.join("small_01.summary.json").exists());
    assert!(out.join("small.sweep.csv").exists());
}
