use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bilinlab(args: &[&str], env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bilinlab"));
    cmd.args(args).env_remove("BILINLAB_OUTPUT_DIR");
    if let Some(d) = env_dir {
        cmd.env("BILINLAB_OUTPUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_kinds_names_every_kind() {
    let out = bilinlab(&["list-kinds"], None);
    assert_eq!(out.status.code(), Some(0));
    let kinds: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(kinds.len(), bilinlab_core::harness::KINDS.len());
    assert!(kinds.iter().any(|k| k == "sharpness"));
}

#[test]
fn validate_reports_bad_configs_with_usage_code() {
    let ok = bilinlab(&["validate", &cfg("sharpness.toml"), &cfg("kernel.toml")], None);
    assert_eq!(ok.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "label = \"x\"\n[experiment]\nkind = \"nope\"\n").unwrap();
    let out = bilinlab(&["validate", &cfg("sharpness.toml"), bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("invalid"));
}

#[test]
fn run_writes_record_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bilinlab(&["run", &cfg("sharpness.toml"), "--output-dir", d], None);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("outcome: Pass"));
    for f in ["sharpness.record.json", "sharpness.sharpness.csv", "sharpness.summary.json", "sharpness.plot.py"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
}

#[test]
fn formats_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bilinlab(&["run", &cfg("sharpness.toml"), "--output-dir", d, "--formats", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("sharpness.sharpness.csv").is_file());
    assert!(!dir.path().join("sharpness.plot.py").exists());
    let bad = bilinlab(&["run", &cfg("sharpness.toml"), "--output-dir", d, "--formats", "xlsx"], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn env_var_sets_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = bilinlab(&["run", &cfg("sharpness.toml")], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("sharpness.record.json").is_file());
}

#[test]
fn cap_grid_violation_is_a_preflight_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bilinlab(&["run", &cfg("parametrix.toml"), "--output-dir", d, "--cap-grid", "512"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "nothing is written");
}

#[test]
fn failed_hypothesis_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bilinlab(&["run", &cfg("transversality-gate.toml"), "--output-dir", d], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("hypothesis fails"));
}

#[test]
fn report_reemits_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(bilinlab(&["run", &cfg("sharpness.toml"), "--output-dir", d], None).status.code(), Some(0));
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    let before = [read("sharpness.sharpness.csv"), read("sharpness.summary.json"), read("sharpness.plot.py")];
    let record = dir.path().join("sharpness.record.json");
    let out = bilinlab(&["report", record.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let after = [read("sharpness.sharpness.csv"), read("sharpness.summary.json"), read("sharpness.plot.py")];
    assert_eq!(before, after);
    let missing = bilinlab(&["report", dir.path().join("none.json").to_str().unwrap()], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn seed_override_lands_in_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bilinlab(&["run", &cfg("sharpness.toml"), "--output-dir", d, "--seed-override", "99"], None);
    assert_eq!(out.status.code(), Some(0));
    let rec = bilinlab_core::ResultRecord::load(&dir.path().join("sharpness.record.json")).unwrap();
    assert_eq!(rec.config.seed, 99);
}
