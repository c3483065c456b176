//! End-to-end runs of the `fibercap` binary.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibercap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parses a one-record CSV into `(name, value)` pairs.
fn record(text: &str) -> Vec<(String, String)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from);
    let values = lines.next().unwrap().split(',').map(String::from);
    header.zip(values).collect()
}

fn field(text: &str, name: &str) -> f64 {
    record(text)
        .into_iter()
        .find(|(k, _)| k == name)
        .unwrap_or_else(|| panic!("no column {name}"))
        .1
        .parse()
        .unwrap()
}

const UNIT: [&str; 6] = [
    "--set", "channel.modes=1", "--set", "power.photons_per_second=1", "--set", "channel.tau=1",
];

#[test]
fn unit_channel_capacity() {
    let mut args = UNIT.to_vec();
    args.extend(["--set", "channel.nu=0", "capacity"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(field(&text, "shannon"), 1.0);
    assert_eq!(field(&text, "holevo"), 2.0);
    assert_eq!(field(&text, "ea"), 4.0);
}

#[test]
fn exit_codes() {
    let out = run(&["--preset", "paper-like", "--set", "link.segment_length_km=-1", "capacity"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("segment_length_km"));

    let out = run(&["--preset", "paper-like", "--set", "link.bogus=1", "capacity"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--config", "/nonexistent/fibercap.toml", "capacity"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "--preset", "paper-like", "--set", "link.gain_rule=g2", "--set", "link.receiver=active",
        "--set", "channel.modes=1e10", "capacity",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["--preset", "paper-like", "advantage", "--factor", "1e6"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn typo_flag_clears_the_pole() {
    let out = run(&[
        "--preset", "paper-like", "--set", "link.gain_rule=g2", "--set", "link.receiver=active",
        "--set", "channel.modes=1e10", "--assume-nu-eff-a-typo", "capacity",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn short_sweep_csv_and_json() {
    let base = ["--preset", "paper-like", "--set", "sweep.points=2"];
    let out = run(&[&base[..], &["sweep"]].concat());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("100,"));
    assert!(lines[2].starts_with("1e40,"));

    let out = run(&[&base[..], &["--output", "json", "sweep"]].concat());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["x"].as_f64(), Some(1e40));
    let csv_shannon: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(rows[0]["shannon"].as_f64(), Some(csv_shannon));
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let out = run(&["--preset", "paper-like", "--set", "link.segment_count=7", "--dump-config", "capacity"]);
    assert_eq!(out.status.code(), Some(0));
    fs::write(&path, &out.stdout).unwrap();

    let from_file = run(&["--config", path.to_str().unwrap(), "capacity"]);
    let from_flags = run(&["--preset", "paper-like", "--set", "link.segment_count=7", "capacity"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);

    let again = run(&["--config", path.to_str().unwrap(), "--dump-config", "capacity"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cap.json");
    let out = run(&["--preset", "paper-like", "--output", "json", "--out", path.to_str().unwrap(), "capacity"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(json[0]["holevo"].as_f64().unwrap() > 0.0);
}

#[test]
fn modes_and_power() {
    let out = run(&[
        "--set", "geometry.core_radius=25e-6", "--set", "geometry.n_core=1.46",
        "--set", "geometry.n_clad=1.45", "--set", "geometry.slot_rate=1e10", "modes",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let n = field(&text, "spatial_modes");
    assert!((140.0..160.0).contains(&n));
    assert_eq!(field(&text, "modes"), n * 1e10);

    let out = run(&["--preset", "paper-like", "power"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "amplifiers"), 5.0);
    assert!(field(&text, "consumption_per_mode") >= field(&text, "photons_per_mode"));
}

#[test]
fn advantage_with_unit_factor() {
    let out = run(&[
        "--set", "power.photons_per_second=1e16", "--set", "channel.tau=1", "--set", "channel.nu=1",
        "advantage", "--factor", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(field(&stdout(&out), "modes"), 100.0);
}
