use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pom_core::reward::calibrate_schedule;
use pom_sim::artifacts::parse_schedule;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pom-sim"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config(dir: &Path, schedule: &str, horizon: u64) -> PathBuf {
    let text = fs::read_to_string(config(schedule)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["horizon"] = horizon.into();
    let path = dir.join(schedule);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    path
}

#[test]
fn curve_with_landmarks_prints_table() {
    let o = bin()
        .args([
            "curve",
            "--landmarks",
            "1.75,2.20,2.37",
            "--range",
            "0,4",
            "--step",
            "0.5",
        ])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,base,cutoff_factor,reward");
    assert_eq!(lines.len(), 1 + 9);
    let table = stderr(&o);
    assert!(table.contains("1.750000"), "{table}");
    assert!(table.contains("0.499970"), "{table}");
    assert!(table.contains("0.099062"), "{table}");
}

#[test]
fn curve_step_wider_than_range_gives_one_row() {
    let o = bin()
        .args([
            "curve",
            "--landmarks",
            "1.75,2.20,2.37",
            "--range",
            "1,2",
            "--step",
            "5",
        ])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("1.0,"));
}

#[test]
fn curve_rejects_bad_range() {
    let o = bin()
        .args(["curve", "--landmarks", "1.75,2.20,2.37", "--range", "3,1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--range"));
    let o = bin()
        .args(["curve", "--landmarks", "1.75,2.20,2.37", "--step", "0"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_names_the_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, r#"{"a": 2.0, "b": 1.0, "scale": 1.0}"#).unwrap();
    let o = bin()
        .arg("curve")
        .arg("--schedule")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`b`"), "{}", stderr(&o));
}

#[test]
fn saved_schedule_keeps_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = bin()
        .args([
            "curve",
            "--landmarks",
            "1.75,2.20,2.37",
            "--step",
            "1",
            "--save-schedule",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let expected = calibrate_schedule(1.75, 2.20, 2.37, 1.0).unwrap();
    assert_eq!(parse_schedule(&text, &path).unwrap(), expected);
    let a = text.lines().find(|l| l.contains("\"a\"")).unwrap();
    let mantissa = a
        .split(':')
        .nth(1)
        .unwrap()
        .trim()
        .trim_end_matches(',')
        .split('e')
        .next()
        .unwrap();
    assert!(
        mantissa.chars().filter(char::is_ascii_digit).count() >= 15,
        "{a}"
    );

    let o = bin()
        .arg("curve")
        .arg("--schedule")
        .arg(&path)
        .args(["--range", "0,3", "--step", "1"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dynamics.json", 300);
    for out in ["a", "b"] {
        let o = bin()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .args(["--seeds", "2", "--base-seed", "5", "--out"])
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in [
        "aggregate.json",
        "seed-5/blocks.csv",
        "seed-6/agents.csv",
        "seed-6/summary.json",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let agents = fs::read_to_string(dir.path().join("a/seed-5/agents.csv")).unwrap();
    assert!(agents.starts_with("id,hashrate,unit_cost,class,"));
}

#[test]
fn run_overrides_threshold_and_burn_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dynamics.json", 200);
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--threshold", "1000", "--burn-in", "50", "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let agg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/aggregate.json")).unwrap())
            .unwrap();
    assert_eq!(agg["burn_in"], 50);
    assert_eq!(agg["median"]["large_miner_share"], 0.0);
}

#[test]
fn run_usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(config("dynamics.json"))
        .args(["--seeds", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(dir.path().join("missing.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));

    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(config("dynamics.json")).unwrap();
    fs::write(&bad, text.replace("\"min\": 5.0", "\"minimum\": 5.0")).unwrap();
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("population.classes[1].hashrate"),
        "{}",
        stderr(&o)
    );

    fs::write(&bad, text.replace("\"max\": 20.0", "\"max\": 1.0")).unwrap();
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("population.classes[1].hashrate"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn simulation_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("dynamics.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["price"] = serde_json::json!({"constant": 1e-9});
    v["stall"] = serde_json::json!({"max_quanta": 5});
    v["horizon"] = 500.into();
    let cfg = dir.path().join("dead.json");
    fs::write(&cfg, v.to_string()).unwrap();
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("stalled"));
}

fn sweep(dir: &Path, schedule: &str, out: &str, seeds: &str) -> PathBuf {
    let cfg = small_config(dir, schedule, 1500);
    let path = dir.join(out);
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--seeds", seeds, "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn compare_directories() {
    let dir = tempfile::tempdir().unwrap();
    let base = sweep(dir.path(), "constant.json", "constant", "3");
    let treat = sweep(dir.path(), "dynamics.json", "cutoff", "3");

    let o = bin().arg("compare").arg(&base).arg(&base).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert!(
        lines[4].starts_with("median,0.0,0.0,0.0,0.0,1.0,1.0"),
        "{}",
        lines[4]
    );

    let o = bin()
        .arg("compare")
        .arg(&base)
        .arg(&treat)
        .output()
        .unwrap();
    assert!(o.status.success());
    let median = stdout(&o).lines().last().unwrap().to_string();
    let delta: f64 = median.split(',').nth(1).unwrap().parse().unwrap();
    assert!(delta < 0.0, "{median}");

    fs::remove_file(treat.join("seed-1/blocks.csv")).unwrap();
    let o = bin()
        .arg("compare")
        .arg(&base)
        .arg(&treat)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed-1"), "{}", stderr(&o));
}
