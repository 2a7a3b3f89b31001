use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bqc_core::potential::Potential;
use bqclab::config::{parse_config, ConfigError, Subcommand};

fn bqclab(dir: &Path, command: &str, config: &str, sets: &[&str]) -> Output {
    let path = dir.join("run.cfg");
    fs::write(&path, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bqclab"));
    cmd.arg(command).arg("--config").arg(&path).current_dir(dir);
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV, split on commas (no quoted fields in numeric tables).
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema: bqclab/"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, data)
}

#[test]
fn minimal_config_is_valid() {
    let cfg = parse_config("potential = lj\nn = 256\nf = 1.0\nsubcommand = patch-test\n").unwrap();
    assert_eq!(cfg.subcommand, Subcommand::PatchTest);
    assert_eq!(cfg.n, 256);
    assert_eq!(cfg.potential, Potential::lennard_jones());
}

#[test]
fn geometry_that_does_not_fit_is_rejected() {
    let err = parse_config("subcommand = patch-test\nn = 100\nk = 64\n").unwrap_err();
    assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "k"), "{err}");
}

#[test]
fn unknown_key_suggests_nearest() {
    let err = parse_config("subcommand = patch-test\n\nblendshape = cubic\n").unwrap_err();
    let text = err.to_string();
    assert!(text.contains("line 3"), "{text}");
    assert!(text.contains("blend_shape"), "{text}");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_config("# comment\nsubcommand = patch-test\nn 256\n").unwrap_err();
    assert_eq!(
        err,
        ConfigError::Parse {
            line: 3,
            message: "expected 'key = value', found 'n 256'".into()
        }
    );
    let err = parse_config("subcommand = patch-test\nn = many\n").unwrap_err();
    assert!(err.to_string().contains("'n'") && err.to_string().contains("line 2"));
    assert!(parse_config("subcommand = modeling-audit\n").is_err(), "audits need a seed");
    assert!(parse_config("subcommand = dance\n").is_err());
}

#[test]
fn comments_lists_and_infinity() {
    let cfg = parse_config(
        "subcommand = modeling-audit  # trailing comment\nseed = 3\nk_list = 2, 4 ,8\np_list = 1, inf\nshapes = linear,cubic\n",
    )
    .unwrap();
    assert_eq!(cfg.k_list, vec![2, 4, 8]);
    assert_eq!(cfg.p_list, vec![1.0, f64::INFINITY]);
    assert_eq!(cfg.shapes.len(), 2);
}

#[test]
fn patch_test_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bqclab(
        dir.path(),
        "patch-test",
        "model = bqnl\nblend_shape = cubic\nk = 8\nn = 256\n",
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "ghost_dual_norm ≤ 1e-12"), "{}", stdout(&o));
    let (header, data) = rows(&fs::read_to_string(dir.path().join("patch-test.csv")).unwrap());
    assert_eq!(header, ["f", "ghost_dual_norm"]);
    assert_eq!(data.len(), 3);

    let o = bqclab(dir.path(), "patch-test", "model = bqce\nk = 8\nn = 256\n", &[]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("> 1e-12"));
}

#[test]
fn linear_ghost_force_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = bqclab(
        dir.path(),
        "ghost-force",
        "model = bqce\nblend_shape = linear\nk = 8\nn = 256\nf = 1\noutput = out/ghost.csv\nemit_plot_data = true\n",
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, data) = rows(&fs::read_to_string(dir.path().join("out/ghost.csv")).unwrap());
    let col = header.iter().position(|h| h == "transition_dual_seminorm").unwrap();
    let value: f64 = data[0][col].parse().unwrap();
    let eps: f64 = 1.0 / 256.0;
    let expected = 2f64.sqrt() * eps.sqrt() / 8.0 * Potential::lennard_jones().d1(2.0).abs();
    assert!((value - expected).abs() <= 1e-12 * expected, "{value} vs {expected}");
    let (site_header, sites) = rows(&fs::read_to_string(dir.path().join("out/ghost_sites.csv")).unwrap());
    assert_eq!(site_header, ["site", "gamma", "alpha", "beta", "stress", "force"]);
    assert_eq!(sites.len(), 256);
    let plot = fs::read_to_string(dir.path().join("out/ghost.dat")).unwrap();
    assert_eq!(plot.lines().nth(1).unwrap().split(' ').count(), 2);
}

#[test]
fn convergence_sweep_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = "model = bqce\nn = 256\natomistic_width = 17\nk_list = 4, 8, 16, 32\n";
    let a = bqclab(dir.path(), "convergence", config, &["output=a.csv"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).contains("slope_vs_k (n = 256, shape = cubic)"), "{}", stdout(&a));
    let first = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let (header, data) = rows(&first);
    assert_eq!(data.len(), 4);
    assert_eq!(header[3], "error_u12");

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bqclab"));
    cmd.args(["convergence", "--config"])
        .arg(dir.path().join("run.cfg"))
        .args(["--set", "output=b.csv"])
        .env("BQCLAB_THREADS", "1")
        .current_dir(dir.path());
    assert!(cmd.output().unwrap().status.success());
    assert_eq!(first, fs::read_to_string(dir.path().join("b.csv")).unwrap());
}

#[test]
fn seeded_audit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = "n = 64\nk = 6\natomistic_width = 9\nsamples = 12\nseed = 7\n";
    let a = bqclab(dir.path(), "modeling-audit", config, &["output=a.csv"]);
    let b = bqclab(dir.path(), "modeling-audit", config, &["output=b.csv"]);
    assert!(a.status.success() && b.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).contains("violations = 0"));
    let first = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(first, fs::read(dir.path().join("b.csv")).unwrap());
    let c = bqclab(dir.path(), "modeling-audit", config, &["output=c.csv", "seed=8"]);
    assert!(c.status.success());
    assert_ne!(first, fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn remaining_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = "n = 128\natomistic_width = 9\nk = 8\n";
    let e = bqclab(dir.path(), "energy", base, &["state_amplitude=0.05", "seed=1"]);
    assert!(e.status.success(), "{}", stderr(&e));
    assert!(stdout(&e).contains("energy = "));
    let q = bqclab(dir.path(), "equilibrate", base, &["model=bqnl"]);
    assert!(q.status.success(), "{}", stderr(&q));
    assert!(stdout(&q).contains("coercivity = "));
    let (_, data) = rows(&fs::read_to_string(dir.path().join("equilibrate.csv")).unwrap());
    assert_eq!(data.len(), 128);
    let c = bqclab(dir.path(), "critical-strain", base, &["model=bqnl", "k_list=4,8"]);
    assert!(c.status.success(), "{}", stderr(&c));
    let (header, data) = rows(&fs::read_to_string(dir.path().join("critical-strain.csv")).unwrap());
    assert_eq!(header, ["n", "k", "shape", "f_star", "f_star_cb", "error"]);
    assert_eq!(data.len(), 2);
}

#[test]
fn failures_exit_nonzero_with_operation_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = bqclab(dir.path(), "equilibrate", "n = 64\natomistic_width = 9\nk = 4\n", &["max_iter=0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("equilibrate failed"), "{}", stderr(&o));

    let o = bqclab(dir.path(), "energy", "subcommand = patch-test\n", &[]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("parse_config failed"), "{}", stderr(&o));

    let o = bqclab(dir.path(), "energy", "n = 64\n", &["blendshape=cubic"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("blend_shape"));
}
