use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ddla::io::{self, pgm_count, PGM_BLACK, PGM_RED};

fn ddla(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddla"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("DDLA_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn grow_zero_is_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddla(dir.path(), &["grow", "--n", "0", "--seed", "1"]);
    assert!(out.status.success());
    assert_eq!(data_lines(&read(dir.path(), "snapshot.txt")), ["0 0"]);
}

#[test]
fn grow_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["grow", "--n", "1000", "--seed", "7", "--sampler", "exact"];
    assert!(ddla(a.path(), &args).status.success());
    assert!(ddla(b.path(), &args).status.success());
    for f in ["snapshot.txt", "trace.csv", "summary.csv", "config.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    assert_eq!(data_lines(&read(a.path(), "snapshot.txt")).len(), 1001);
}

#[test]
fn every_output_has_a_metadata_header() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["grow", "--n", "50", "--seed", "3"]).status.success());
    for f in ["snapshot.txt", "trace.csv", "summary.csv"] {
        let text = read(d, f);
        assert!(text.starts_with("# ddla "), "{f}");
        for key in ["# seed: 3", "# n: 50", "# version: "] {
            assert!(text.contains(key), "{f} lacks {key}");
        }
    }
    let config: serde_json::Value = serde_json::from_str(&read(d, "config.json")).unwrap();
    assert_eq!(config["command"], "grow");
    assert_eq!(config["seed"], 3);
}

#[test]
fn trace_replays_to_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["grow-ct", "--t", "6", "--seed", "4", "--mode", "harris"]).status.success());
    let (meta, trace) = io::trace_from_csv("trace.csv", &read(d, "trace.csv")).unwrap();
    assert_eq!(meta.get("time_mode"), Some("continuous"));
    let snap = io::Snapshot::parse("snapshot.txt", &read(d, "snapshot.txt")).unwrap();
    assert_eq!(trace.final_cluster().sorted_sites(), snap.sites);
}

#[test]
fn seed_sweep_writes_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["grow", "--n", "20", "--seeds", "5..15"]).status.success());
    let summary = read(d, "summary.csv");
    let rows = data_lines(&summary);
    assert_eq!(rows.len(), 11);
    assert!(rows[1].starts_with("5,21,"));
    let occ = read(d, "occupancy.csv");
    assert!(data_lines(&occ).contains(&"0,0,10,1"));
}

#[test]
fn verify_routes_only_the_requested_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddla(dir.path(), &["verify", "--only", "coupling", "--seeds", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS coupling"));
    assert!(!stdout.contains("eq1"));
    let rows = data_lines(&read(dir.path(), "verify.csv")).len();
    assert_eq!(rows, 2);
}

#[test]
fn verify_exact_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddla(dir.path(), &["verify", "--only", "eq1,linesum,linechoice", "--seeds", "40"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().matches("PASS").count(), 3);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ddla(dir.path(), &["grow", "--bogus"]).status.code(), Some(1));
    assert_eq!(ddla(dir.path(), &["grow", "--sampler", "nope"]).status.code(), Some(1));
    assert_eq!(ddla(dir.path(), &["verify", "--seeds", "5..5"]).status.code(), Some(1));
    assert_eq!(ddla(dir.path(), &["grow-ct", "--t", "-1"]).status.code(), Some(1));
    assert_eq!(ddla(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn io_and_parse_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = d.join("missing.txt");
    let out = ddla(d, &["render", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    let bad = d.join("bad.txt");
    fs::write(&bad, "# ddla snapshot\n# seed: 1\n0 0\n0 one\n").unwrap();
    let out = ddla(d, &["render", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:4:"));
}

#[test]
fn render_singleton_has_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["grow", "--n", "0"]).status.success());
    let snap = d.join("snapshot.txt");
    for fmt in ["pgm", "svg"] {
        assert!(ddla(d, &["render", "--input", snap.to_str().unwrap(), "--format", fmt]).status.success());
    }
    let pgm = read(d, "snapshot.pgm");
    assert!(pgm.starts_with("P2\n1 1\n255\n"));
    assert_eq!(pgm_count(&pgm, PGM_BLACK), 1);
    assert_eq!(read(d, "snapshot.svg").matches("fill=\"black\"").count(), 1);
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["grow", "--n", "300", "--seed", "2"]).status.success());
    let snap = d.join("snapshot.txt");
    let first = d.join("a.svg");
    let second = d.join("b.svg");
    for p in [&first, &second] {
        let args = ["render", "--input", snap.to_str().unwrap(), "--format", "svg", "--output", p.to_str().unwrap()];
        assert!(ddla(d, &args).status.success());
    }
    assert_eq!(fs::read(first).unwrap(), fs::read(second).unwrap());
}

#[test]
fn colored_render_counts_red_sites() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ddla(d, &["influence", "--t", "4", "--seed", "11", "--f", "0,0", "--f", "2,0"]).status.success());
    let text = read(d, "colored.csv");
    let (_, state) = io::colored_state_from_csv("colored.csv", &text).unwrap();
    assert!(!state.red.is_empty());
    let colored = d.join("colored.csv");
    assert!(ddla(d, &["render", "--input", colored.to_str().unwrap()]).status.success());
    let pgm = read(d, "colored.pgm");
    assert_eq!(pgm_count(&pgm, PGM_RED), state.red.len());
    assert_eq!(pgm_count(&pgm, PGM_BLACK), state.black.len());
}

#[test]
fn influence_coupling_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ddla(d, &["influence", "--t", "5", "--seed", "3", "--f", "0,0", "--f", "1,1", "--g", "1,1"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&read(d, "coupling.json")).unwrap();
    assert_eq!(report["holds"], true);
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ddla"))
        .args(["dfpp", "--t", "2", "--seed", "1"])
        .env("DDLA_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("snapshot.txt").exists());
}

#[test]
fn stats_law_of_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let snap = d.join("three.txt");
    fs::write(&snap, "# ddla snapshot\n0 0\n0 1\n1 1\n").unwrap();
    assert!(ddla(d, &["stats", "law", "--input", snap.to_str().unwrap()]).status.success());
    let text = read(d, "activity.csv");
    assert!(text.contains("# total: 7/2"), "{text}");
    // (1,0): one edge, escape 1/2.
    assert!(data_lines(&text).contains(&"1,0,1,1,2,1,2"), "{text}");
}

#[test]
fn stats_kinds_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: &[(&[&str], &str)] = &[
        (&["stats", "exponents", "--n", "3000", "--seeds", "4", "--from", "100"], "exponents.csv"),
        (&["stats", "rates", "--t", "10", "--seeds", "3"], "rates.csv"),
        (&["stats", "decay", "--max-height", "4", "--seeds", "50"], "decay.csv"),
        (&["stats", "never-added", "--n", "50", "--seeds", "40"], "never_added.csv"),
        (&["stats", "rows", "--n", "200"], "rows.csv"),
        (&["stats", "cones", "--n", "200", "--apex", "5,5", "--apex", "100,-100"], "cones.csv"),
        (&["stats", "red-scaling", "--times", "1,2", "--seeds", "5"], "red_scaling.csv"),
        (&["stats", "speed", "--width", "64", "--t", "2", "--seeds", "2"], "speed.json"),
        (&["stats", "activity", "--seeds", "20", "--max-size", "10"], "activity_constant.csv"),
    ];
    for (args, file) in runs {
        let out = ddla(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = read(d, file);
        assert!(file.ends_with(".json") || text.starts_with("# ddla "), "{file}");
    }
}
