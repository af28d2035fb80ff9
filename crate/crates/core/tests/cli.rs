//! End-to-end runs of the `bcsm` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bcsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcsm"))
        .args(args)
        .env_remove("BCSM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn out_arg(dir: &TempDir) -> String {
    dir.path().display().to_string()
}

#[test]
fn solve_writes_requested_rows() {
    let dir = TempDir::new().unwrap();
    let out = bcsm(&[
        "solve",
        "--out",
        &out_arg(&dir),
        "--scenario",
        "s1",
        "--model",
        "markov",
        "--horizon",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "occupancy.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "scenario,model,age_band,start_state,t_years,p0,p1,p2,p3,p4,p5"
    );
    assert_eq!(lines.len(), 1 + 5 * 4);
    let row = lines.iter().find(|l| l.starts_with("S1,M,65-69,3,5.0,")).unwrap();
    let p5: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((100.0 * p5 - 74.03).abs() <= 0.02, "{row}");
    assert!(!csv.contains('\r'));
}

#[test]
fn report_reproduces_headline_rows() {
    let dir = TempDir::new().unwrap();
    let out = bcsm(&["report", "--out", &out_arg(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let survival = read(dir.path(), "survival.csv");
    assert!(survival.starts_with("method,model,age_band,start_state,horizon_years,survival_pct\n"));
    assert!(survival.lines().any(|l| l == "ons,M,65-69,1,5,95.57"), "{survival}");
    assert!(survival.lines().any(|l| l == "adjusted,M,65-69,3,10,6.04"));
    let excess = read(dir.path(), "excess.csv");
    assert!(excess.lines().any(|l| l == "S2,M,65-69,bc,8,152"), "{excess}");
    assert!(excess.lines().any(|l| l.starts_with("S1,M,65-69,other,363,")));
    for line in excess.lines().filter(|l| l.starts_with("PrePandemic,")) {
        assert!(line.ends_with(",0,0"), "{line}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        let out = bcsm(&[
            "simulate",
            "--out",
            &out_arg(d),
            "--scenario",
            "s2",
            "--paths",
            "2000",
            "--seed",
            "9",
            "--dump",
            "3",
        ]);
        assert!(out.status.success());
        assert!(
            bcsm(&["solve", "--out", &out_arg(d), "--scenario", "s2", "--step", "0.05"])
                .status
                .success()
        );
    }
    for f in ["simulation.csv", "paths.csv", "occupancy.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let sim = read(a.path(), "simulation.csv");
    assert!(sim.lines().nth(1).unwrap().starts_with("S2,M,65-69,0,1.0,2000,"));
    assert!(read(a.path(), "paths.csv").starts_with("path_id,t,from,to\n"));
}

#[test]
fn env_var_sets_output_dir() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bcsm"))
        .args(["fit", "--degree", "3", "--degree", "4"])
        .env("BCSM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let fit = read(dir.path(), "fit.csv");
    assert_eq!(fit.lines().next().unwrap(), "degree,power,coefficient");
    assert_eq!(fit.lines().count(), 1 + 4 + 5);
}

#[test]
fn config_file_drives_the_run() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("run.toml");
    let out_dir = dir.path().join("from-config");
    fs::write(
        &config,
        format!(
            "model = \"semimarkov\"\nbands = [\"85-89\"]\nstart_states = [3]\nhorizons = [1]\nout_dir = \"{}\"\n\n\
             [[overlays]]\nname = \"Lockdown\"\n\n[[overlays.diagnosis]]\nstart_month = \"2020-04\"\nend_month = \"2021-04\"\nmultiplier = 0.5\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = bcsm(&["solve", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&out_dir, "occupancy.csv");
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("Lockdown,SM,85-89,3,1.0,"));
}

#[test]
fn sweep_labels_every_row() {
    let dir = TempDir::new().unwrap();
    let out = bcsm(&["sweep", "--out", &out_arg(&dir), "--scenario", "s2", "--step", "0.05"]);
    assert!(out.status.success());
    let excess = read(dir.path(), "sweep_excess.csv");
    assert!(excess.starts_with("params,scenario,model,age_band,cause,excess_per_100k,yll_per_100k\n"));
    for id in [
        "base", "alpha0.8", "alpha0.4", "beta0.2", "beta0.1", "mu35x0.8", "mu35x1.2",
    ] {
        assert!(excess.lines().any(|l| l.starts_with(&format!("{id},S2,"))), "{id}");
    }
    assert_eq!(read(dir.path(), "sweep_failures.csv").lines().count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bcsm(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(bcsm(&["frobnicate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    for bad in [
        ["--alpha", "1.5"],
        ["--scenario", "s9"],
        ["--step", "0.03"],
        ["--model", "cox"],
    ] {
        let out = bcsm(&["solve", "--out", &out_arg(&dir), bad[0], bad[1]]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("bcsm: "));
    }
    assert_eq!(bcsm(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    let out = bcsm(&["fit", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        bcsm(&["solve", "--config", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn validate_reports_each_table() {
    let dir = TempDir::new().unwrap();
    let out = bcsm(&["validate", "--out", &out_arg(&dir)]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for table in ["T4", "T5", "EXCESS", "B1", "F2"] {
        assert!(stdout.lines().any(|l| l.starts_with(table)), "{table}");
    }
    let rows = read(dir.path(), "validation.csv");
    assert_eq!(rows.lines().count(), 1 + 2350);
    let failed = rows.lines().skip(1).any(|l| l.ends_with(",false"));
    assert_eq!(out.status.code(), Some(if failed { 1 } else { 0 }));
}
