use std::path::Path;
use std::process::Command;

use lmg_otto::sweep::sweep_cycle;
use lmg_otto::{EngineParams, ScalingMode};
use lmg_otto_cli::emit::{parse_csv, parse_json, sweep_to_table, table_to_sweep, to_csv, to_json};
use lmg_otto_cli::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lmg-otto"))
}

fn run(args: &[&str], out: &Path) -> std::process::Output {
    bin().args(args).arg("--out-dir").arg(out).output().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["cycle", "--twice-s", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(
        run(&["sweep", "--frobnicate"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["sweep", "--t-high", "0.05"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["sweep", "--config", "/nonexistent/run.conf"], dir.path())
            .status
            .code(),
        Some(4)
    );
    let file = dir.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    assert_eq!(run(&["cycle"], &file).status.code(), Some(4));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn cycle_writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["cycle", "--twice-s", "8", "--format", "csv,json"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("cycle.csv").exists());
    assert!(dir.path().join("cycle.json").exists());
    assert!(!dir.path().join("cycle.svg").exists());
    let text = std::fs::read_to_string(dir.path().join("cycle.csv")).unwrap();
    let (meta, table) = parse_csv(&text).unwrap();
    assert!(meta.iter().any(|(k, v)| k == "t_high" && v == "0.4"));
    assert_eq!(table.rows.len(), 2);
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sweep", "--n-to", "12"],
        vec!["interference", "--mode", "nonextensive"],
        vec![
            "geometry",
            "--twice-s",
            "6",
            "--quad-theta",
            "256",
            "--quad-phi",
            "512",
        ],
        vec!["squeezed", "--squeeze-r", "0.5", "--k-max", "20"],
        vec!["figure", "fig3b", "--n-to", "20"],
    ] {
        let out = run(&args, dir.path());
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let svg = std::fs::read_to_string(dir.path().join("fig3b.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    // odd N drawn hollow
    assert!(svg.contains("fill=\"white\" stroke"));
}

#[test]
fn sweep_tables_round_trip() {
    let t = sweep_cycle(&EngineParams::default(), 1, 16, &ScalingMode::ALL).unwrap();
    let cfg = parse_config(["lmg-otto", "sweep"]).unwrap();
    let meta = cfg.meta();
    let table = sweep_to_table(&t);

    let (_, from_json) = parse_json(&to_json(&meta, &table)).unwrap();
    assert_eq!(table_to_sweep(&from_json).unwrap(), t);

    let csv = to_csv(&meta, &table);
    let (_, from_csv) = parse_csv(&csv).unwrap();
    let back = table_to_sweep(&from_csv).unwrap();
    assert_eq!(back.rows.len(), t.rows.len());
    for (a, b) in back.rows.iter().zip(&t.rows) {
        assert_eq!((a.n, a.mode, a.parity), (b.n, b.mode, b.parity));
        assert!((a.w - b.w).abs() <= 1e-11 * b.w.abs().max(1e-300));
        assert_eq!(a.eta_signed.is_some(), b.eta_signed.is_some());
    }
    assert_eq!(to_csv(&meta, &sweep_to_table(&back)), csv);
}

#[test]
fn identical_meta_means_identical_data() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(
            run(&["sweep", "--n-to", "10", "--mode", "extensive"], d.path())
                .status
                .success()
        );
    }
    for f in ["sweep.csv", "sweep.json", "sweep.svg", "returns.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}
