use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn arrowwalk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrowwalk")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ce1_milestone_csv() {
    let dir = TempDir::new().unwrap();
    let o = arrowwalk(&["counterexample", "ce1", "--N", "3", "--kmax", "8", "--out", "m.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,x_k,t_k,s_k,ratio_hi,ratio_lo");
    assert_eq!(lines.len(), 9);
    assert!(!text.contains('\r'));
    let last: Vec<f64> = lines[8].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(&last[..4], &[8.0, 7381.0, 12301.0, 17222.0]);
    assert!((last[4] - 0.6).abs() < 1e-3 && (last[5] - 1.0 / 7.0).abs() < 1e-3);
}

#[test]
fn ce1_json_wraps_rows() {
    let dir = TempDir::new().unwrap();
    let o = arrowwalk(&["counterexample", "ce1", "--kmax", "2", "--format", "json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[1]["x_k"], 10);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn ce2_lead_sets() {
    let dir = TempDir::new().unwrap();
    let o = arrowwalk(&["counterexample", "ce2", "--variant", "primed"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lead sets (7, 10)"));
    let o = arrowwalk(&["counterexample", "ce2", "--variant", "periodic", "--cycles", "4"], dir.path());
    assert!(stdout(&o).contains("lead sets (28, 40)"));
}

#[test]
fn campaign_from_env_files_is_reproducible() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("e.json"), r#"{"default": [0.6, 0.6], "sites": {"-1": [0.2]}}"#).unwrap();
    fs::write(dir.path().join("e2.json"), r#"{"default": [0.9, 0.9], "sites": {"-1": [0.5]}}"#).unwrap();
    let args = ["campaign", "--env", "e.json", "--env2", "e2.json", "--trials", "200", "--horizon", "500", "--seed", "42", "--no-timestamp"];
    let a = arrowwalk(&args, dir.path());
    let b = arrowwalk(&args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(report.get("wall_clock_seconds").unwrap().is_null());
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["fail"] == 0));
}

#[test]
fn failing_campaign_exits_one_with_dump() {
    let dir = TempDir::new().unwrap();
    let o = arrowwalk(
        &["campaign", "--family", "independent-control", "--trials", "50", "--horizon", "300", "--dump", "d.csv", "--checks", "envelopes,max_visits"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL envelopes"));
    let dump = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(dump.starts_with("trial,check,status\n0,envelopes,"));
    assert_eq!(dump.lines().count(), 1 + 50 * 2);
}

#[test]
fn unordered_environments_are_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("e.json"), r#"{"default": [0.9]}"#).unwrap();
    fs::write(dir.path().join("e2.json"), r#"{"default": [0.1]}"#).unwrap();
    let o = arrowwalk(&["campaign", "--env", "e.json", "--env2", "e2.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [&["frobnicate"][..], &["run", "--horizon", "3", "--bogus"], &["run", "--horizon", "3"], &["verify", "--checks", "nonsense"]] {
        let o = arrowwalk(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = arrowwalk(&["run", "--system", "missing.json", "--horizon", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_then_verify_paths() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("l.json"), r#"{"kind": "explicit", "default_fill": "R", "stacks": {"0": "L"}}"#).unwrap();
    fs::write(dir.path().join("r.json"), r#"{"kind": "explicit", "default_fill": "R"}"#).unwrap();
    assert!(arrowwalk(&["run", "--system", "l.json", "--horizon", "6", "--out", "l.csv"], dir.path()).status.success());
    assert!(arrowwalk(&["run", "--system", "r.json", "--horizon", "6", "--out", "r.csv"], dir.path()).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("l.csv")).unwrap(), "n,pos\n0,0\n1,-1\n2,0\n3,1\n4,2\n5,3\n6,4\n");

    let o = arrowwalk(&["verify", "--paths", "l.csv,r.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = arrowwalk(&["verify", "--paths", "r.csv,l.csv", "--checks", "envelopes"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("check,passed,vacuous,t,x,k,detail\nenvelopes,false,false,1,"));

    let o = arrowwalk(&["verify", "--system", "l.json", "--system2", "r.json", "--horizon", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn couple_methods() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.json"), r#"{"default": [0.2, 0.5, 0.7]}"#).unwrap();
    fs::write(dir.path().join("b.json"), r#"{"default": [0.7, 0.5, 0.2]}"#).unwrap();
    fs::write(dir.path().join("p.json"), r#"{"cap": 3, "blocks": [[1, 2, 3]]}"#).unwrap();
    for method in ["block-stack", "swap-chain"] {
        let o = arrowwalk(
            &["couple", "--method", method, "--env", "a.json", "--env2", "b.json", "--partition", "p.json", "--horizon", "400", "--seed", "3"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).lines().count(), 402);
    }
    let o = arrowwalk(&["couple", "--method", "envelope", "--horizon", "400", "--beta", "-0.5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn stats_on_deterministic_environment() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("one.json"), r#"{"default": [], "tail": 1.0}"#).unwrap();
    let o = arrowwalk(&["stats", "--env", "one.json", "--trials", "3", "--horizon", "100", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["quantity"], "speed");
    assert_eq!(v[0]["mean"], 1.0);
    assert_eq!(v[2]["mean"], 0.0);
}
