use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nlgs(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlgs"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn supercritical_alpha_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["solve", "--op", "frac", "--s", "0.3", "--alpha", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical"));
}

#[test]
fn ilw_solve_recovers_sech() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["solve", "--op", "ilw", "--mu", "0.6366197723675814", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("solve.json"));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["converged"], true);
    assert!(v["result"]["oracle_sup_distance"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2049);
}

#[test]
fn frac_solve_at_s_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["solve", "--op", "frac", "--s", "1", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("solve.json"));
    assert!(v["result"]["oracle_sup_distance"].as_f64().unwrap() < 1e-6);
    assert!((v["result"]["peak"].as_f64().unwrap() - 1.5).abs() < 1e-6);
}

#[test]
fn iteration_budget_exhaustion_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["solve", "--op", "ilw", "--max-iters", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&dir.path().join("solve.json"))["result"]["converged"], false);
}

#[test]
fn verify_single_gr_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["--no-timestamp", "verify", "--only", "gr-identity", "--tau", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("verify.json"));
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["pass"], true);
    assert!(!checks[0]["paper_anchor"].as_str().unwrap().is_empty());
    assert!(v.get("timestamp").is_none());
}

#[test]
fn verify_funk_hecke_lmax_ten() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["verify", "--only", "funk-hecke", "--lmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["checks"].as_array().unwrap().len(), 11);
    assert_eq!(v["pass"], true);
    assert!(v["timestamp"].as_str().unwrap().starts_with("unix:"));
}

#[test]
fn verify_reports_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--no-timestamp",
        "verify",
        "--only",
        "angular-reduction,conformal,gr-identity,funk-hecke,ilw-constant",
    ];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(nlgs(&a, &args).status.code(), Some(0));
    assert_eq!(nlgs(&b, &args).status.code(), Some(0));
    let ra = std::fs::read(a.join("verify.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("verify.json")).unwrap());
    let v: Value = serde_json::from_slice(&ra).unwrap();
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(names.len() >= 20);
}

#[test]
fn verify_unknown_group_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nlgs(dir.path(), &["verify", "--only", "bogus"]).status.code(), Some(2));
}

#[test]
fn spectrum_ilw_sech_has_one_zero_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["spectrum", "--op", "ilw", "--profile", "sech"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("spectrum.json"));
    assert_eq!(v["result"]["spectrum"]["zero_modes"].as_array().unwrap().len(), 1);
    assert_eq!(v["result"]["nondegeneracy"]["status"], "pass");
    let csv = std::fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert!(csv.starts_with("index,eigenvalue\n"));
}

#[test]
fn spectrum_without_closed_form_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["spectrum", "--op", "frac", "--profile", "sech"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_sweep_writes_monotone_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["constants", "--theta-min", "0.1", "--theta-max", "3.0", "--steps", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 30);
    let half: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] <= std::f64::consts::FRAC_PI_2).collect();
    assert!(half.windows(2).all(|w| w[1][1] > w[0][1]));
    for r in &rows {
        assert!((r[1] - r[2]).abs() <= 1e-9 * r[1]);
        assert!(r[3] <= 1e-7);
    }
}

#[test]
fn constants_rejects_theta_outside_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["constants", "--theta-max", "3.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_values_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sweep\ntheta-min = 0.5\ntheta-max = 1.5\nsteps = 4\n").unwrap();
    let cfg_arg = cfg.to_str().unwrap();
    let out = nlgs(dir.path(), &["--config", cfg_arg, "constants", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("constants.json"));
    assert_eq!(v["config"]["theta_min"], 0.5);
    assert_eq!(v["config"]["steps"], 3);
    assert_eq!(v["result"].as_array().unwrap().len(), 3);

    std::fs::write(&cfg, "thta-min = 0.5\n").unwrap();
    let out = nlgs(dir.path(), &["--config", cfg_arg, "constants"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nlgs"))
            .env("NLGS_THREADS", threads)
            .arg("--out-dir")
            .arg(dir.path())
            .args(["verify", "--only", "gr-identity", "--tau", "1"])
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn continuation_short_branch_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["continue", "--alpha", "1", "--s-to", "0.9", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    assert!(csv.starts_with("s,residual,even_gap,peak_value,l2_norm\n"));
    assert_eq!(csv.lines().count(), 6);
    let manifest = json(&dir.path().join("branch_manifest.json"));
    for p in manifest["points"].as_array().unwrap() {
        assert!(dir.path().join("profiles").join(p["file"].as_str().unwrap()).exists());
    }
    assert_eq!(json(&dir.path().join("continue.json"))["result"]["complete"], true);
}

#[test]
fn continuation_outside_window_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlgs(dir.path(), &["continue", "--alpha", "4", "--s-to", "0.3", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
