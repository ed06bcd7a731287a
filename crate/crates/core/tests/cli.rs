use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use infotest::cli_io::{Payload, ResultEnvelope};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn infotest(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_infotest"));
    cmd.args(args);
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().unwrap()
}

fn envelope(dir: &Path) -> ResultEnvelope {
    let text = std::fs::read_to_string(dir.join("result.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn config_arg(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn equilibrium_data_is_not_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = infotest(&["test", "--config", &config_arg("public_test.json")], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let env = envelope(dir.path());
    env.validate().unwrap();
    assert_eq!(env.reject, Some(false));
    assert!(env.input_hash.starts_with("sha256:"));
    assert!(env.finished_unix_ms >= env.started_unix_ms);
    let rows = csv_rows(&dir.path().join("theta_pvalues.csv"));
    assert!(!rows.is_empty());
    assert_eq!(rows[0][0], "-3");
}

#[test]
fn weak_signal_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = infotest(&["test", "--config", &config_arg("weak_test.json")], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    match envelope(dir.path()).payload {
        Payload::Test(d) => {
            assert!(d.reject && d.sup_p <= 0.05);
            assert_eq!(d.records.len(), 2);
        }
        other => panic!("unexpected payload {other:?}"),
    }
}

#[test]
fn reruns_with_a_seed_are_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["test", "--config", &config_arg("public_test.json"), "--seed", "77", "--threads", "2"];
    assert_eq!(infotest(&args, Some(a.path())).status.code(), Some(0));
    assert_eq!(infotest(&args, Some(b.path())).status.code(), Some(0));
    let (ea, eb) = (envelope(a.path()), envelope(b.path()));
    assert_eq!(ea.config.test.as_ref().unwrap().seed, 77);
    assert_eq!(serde_json::to_string(&ea.payload).unwrap(), serde_json::to_string(&eb.payload).unwrap());
    assert_eq!(std::fs::read(a.path().join("theta_pvalues.csv")).unwrap(), std::fs::read(b.path().join("theta_pvalues.csv")).unwrap());
}

#[test]
fn market_confidence_set_flags_the_perturbed_markets() {
    let dir = tempfile::tempdir().unwrap();
    let out = infotest(&["cs-markets", "--config", &config_arg("sixteen_markets.json")], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("markets.csv"));
    assert_eq!(rows.len(), 16);
    let rejected: Vec<&str> = rows.iter().filter(|r| r[5] == "reject").map(|r| r[0].as_str()).collect();
    assert_eq!(rejected, ["x=(0,3)", "x=(2,0)", "x=(3,1)"]);
    assert!(rows.iter().all(|r| r[4] != "reject" || r[5] == "reject"));
    let env = envelope(dir.path());
    let text = serde_json::to_string(&env).unwrap();
    assert_eq!(serde_json::from_str::<ResultEnvelope>(&text).unwrap(), env);
}

#[test]
fn power_table_has_one_row_per_design_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = infotest(&["mc-power", "--config", &config_arg("tiny_power.json")], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("power.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let rate: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
    assert_eq!(envelope(dir.path()).reject, None);
}

#[test]
fn bounds_match_the_analytic_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/bce_bounds.json");
    let out = infotest(&["bce-bounds", "--config", &config.display().to_string()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("bounds.csv"));
    let entry = rows.iter().find(|r| r[1] == "y=(1,0)").unwrap();
    let lower: f64 = entry[2].parse().unwrap();
    assert!((lower - 0.25 * (1.0 + 0.8 * (1.0 - 0.6))).abs() < 0.01, "{lower}");
}

#[test]
fn errors_exit_with_one() {
    let missing = infotest(&["test", "--config", "/nonexistent/config.json"], None);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("config.json"));

    let no_config = infotest(&["test"], None);
    assert_eq!(no_config.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "market_id,x_0,y_0,y_1\na,1,0,0\nb,7,0,1\n").unwrap();
    let parse = infotest(&["test", "--config", &config_arg("public_test.json"), "--data", &bad.display().to_string()], None);
    assert_eq!(parse.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&parse.stderr));

    let wrong = infotest(&["seq-test", "--config", &config_arg("public_test.json")], None);
    assert_eq!(wrong.status.code(), Some(1));
}
