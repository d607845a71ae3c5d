use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

use modreyn::config::RunConfig;

fn case_config(radius: f64, h0: f64, alpha: f64) -> Value {
    json!({
        "geometry": {"R": radius, "h0": h0},
        "kinematics": {"U0": 0.0, "Uh": 1.0},
        "viscosity": {"kind": "barus", "mu0": 0.158, "alpha": alpha},
        "solver": {"N_theta": 2000}
    })
}

fn case1() -> Value {
    case_config(1e-2, 1e-6, 5.59e-8)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn modreyn(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_modreyn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("MODREYN_WORKERS")
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn solve(config: &Path, variant: &str, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--variant",
        variant,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    modreyn(&args)
}

#[test]
fn solve_modified_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "c.json", &case1());
    let out = dir.path().join("out");
    assert_eq!(solve(&config, "modified", &out, &[]), 0);

    let report = read_json(&out.join("modified/report.json"));
    let theta2 = report["theta2_rad"].as_f64().unwrap();
    assert!((theta2 - 0.0067).abs() < 0.1 * 0.0067, "{theta2}");
    assert_eq!(report["variant"], "modified");
    assert!(report.get("error").is_none());
    let p_max = report["p_max_Pa"].as_f64().unwrap();
    let mu_max = report["mu_max_Pas"].as_f64().unwrap();
    assert_eq!(mu_max, 0.158 * (5.59e-8 * p_max).exp());
    assert!(report["defaults_applied"]
        .as_array()
        .unwrap()
        .iter()
        .any(|d| d == "solver.M_y = 50"));

    let artifacts: Vec<&str> = report["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_str().unwrap())
        .collect();
    for name in [
        "pressure.csv",
        "viscosity.csv",
        "velocity.csv",
        "convergence.csv",
        "report.json",
    ] {
        assert!(
            artifacts.contains(&format!("modified/{name}").as_str()),
            "{name}"
        );
    }
    for a in &artifacts {
        assert!(out.join(a).is_file(), "{a}");
    }

    // the echoed config reloads to the same configuration
    let echo = write_json(dir.path(), "echo.json", &report["config"]);
    let original = modreyn::config::load_config(&config).unwrap();
    let reloaded: RunConfig = modreyn::config::load_config(&echo).unwrap();
    assert_eq!(original, reloaded);

    let convergence = fs::read_to_string(out.join("modified/convergence.csv")).unwrap();
    assert_eq!(
        convergence.lines().next().unwrap(),
        "iteration,l2_diff_Pa,theta2_rad,p_max_Pa"
    );
    assert_eq!(convergence.lines().count(), 10);
    let velocity = fs::read_to_string(out.join("modified/velocity.csv")).unwrap();
    assert_eq!(velocity.lines().next().unwrap(), "theta_rad,y_m,u_mps");
    assert_eq!(velocity.lines().count(), 1 + 2001 * 51);
}

#[test]
fn piezo_has_no_velocity_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "c.json", &case1());
    let out = dir.path().join("out");
    assert_eq!(solve(&config, "piezo", &out, &[]), 0);
    assert!(!out.join("piezo/velocity.csv").exists());
    let pressure = fs::read_to_string(out.join("piezo/pressure.csv")).unwrap();
    assert_eq!(pressure.lines().next().unwrap(), "theta_rad,p_Pa,mu_Pas");
}

#[test]
fn zero_entrainment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = case1();
    c["kinematics"]["Uh"] = json!(0.0);
    let config = write_json(dir.path(), "c.json", &c);
    let out = dir.path().join("out");
    assert_eq!(solve(&config, "piezo", &out, &[]), 2);
    let report = read_json(&out.join("piezo/report.json"));
    assert_eq!(report["error"]["kind"], "zero_entrainment");
}

#[test]
fn large_alpha_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "c.json", &case_config(1e-2, 1e-6, 1e-5));
    let out = dir.path().join("out");
    assert_eq!(solve(&config, "modified", &out, &[]), 3);
    let report = read_json(&out.join("modified/report.json"));
    assert_eq!(report["error"]["kind"], "ellipticity_loss");
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = serde_json::to_string(&case1())
        .unwrap()
        .replace("viscosity", "viscocity");
    let config = dir.path().join("c.json");
    fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    assert_eq!(solve(&config, "piezo", &out, &[]), 1);
    let report = read_json(&out.join("piezo/report.json"));
    assert_eq!(report["error"]["kind"], "config");
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("`viscosity`"));

    fs::write(&config, "{ \"geometry\": ").unwrap();
    assert_eq!(solve(&config, "piezo", &out, &[]), 1);
    assert_eq!(
        read_json(&out.join("piezo/report.json"))["error"]["kind"],
        "parse"
    );

    assert_eq!(
        solve(&dir.path().join("missing.json"), "piezo", &out, &[]),
        1
    );
}

#[test]
fn compare_case2_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "c.json", &case_config(1e-3, 1e-6, 1.75e-7));
    let out = dir.path().join("out");
    let code = modreyn(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = read_json(&out.join("comparison_report.json"));
    let ratio = report["p_max_ratios"]["modified/piezo"].as_f64().unwrap();
    assert!((ratio - 18.2 / 15.9).abs() < 0.05, "{ratio}");
    assert!(report["mu_max_ratios"]["modified/piezo"].as_f64().unwrap() > 1.0);
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "theta_rad,p_classical_Pa,p_piezo_Pa,p_modified_Pa"
    );
    for a in report["artifacts"].as_array().unwrap() {
        assert!(out.join(a.as_str().unwrap()).is_file(), "{a}");
    }
}

#[test]
fn compare_identical_variants() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = case1();
    c["variants"] = json!(["piezo", "piezo"]);
    let config = write_json(dir.path(), "c.json", &c);
    let out = dir.path().join("out");
    let code = modreyn(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = read_json(&out.join("comparison_report.json"));
    assert_eq!(
        report["p_max_ratios"]["piezo/piezo_2"].as_f64().unwrap(),
        1.0
    );
    assert_eq!(
        report["p_max_ratios"]["piezo_2/piezo"].as_f64().unwrap(),
        1.0
    );
}

#[test]
fn compare_reports_failed_variant() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = case_config(1e-2, 1e-6, 1e-5);
    c["variants"] = json!(["classical", "piezo"]);
    let config = write_json(dir.path(), "c.json", &c);
    let out = dir.path().join("out");
    let code = modreyn(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    let report = read_json(&out.join("comparison_report.json"));
    assert_eq!(report["variants"][1]["error"]["kind"], "ellipticity_loss");
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "theta_rad,p_classical_Pa");
}

fn sweep(config: &Path, grid: &Path, out: &Path, workers: &str) -> i32 {
    modreyn(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--workers",
        workers,
    ])
}

#[test]
fn degenerate_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = case1();
    c["variants"] = json!(["modified"]);
    // the sweep sets h0 = (h0/R) R
    c["geometry"]["h0"] = json!(1e-4 * 1e-2);
    let config = write_json(dir.path(), "c.json", &c);
    let grid = write_json(
        dir.path(),
        "g.json",
        &json!({"alpha": [5.59e-8], "h0_over_R": [1e-4]}),
    );
    let out = dir.path().join("sweep");
    assert_eq!(sweep(&config, &grid, &out, "2"), 0);
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 2);

    let single = dir.path().join("single");
    assert_eq!(solve(&config, "modified", &single, &[]), 0);
    let report = read_json(&single.join("modified/report.json"));
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields[2], "modified");
    assert_eq!(
        fields[3].parse::<f64>().unwrap(),
        report["theta2_rad"].as_f64().unwrap()
    );
    assert_eq!(
        fields[4].parse::<f64>().unwrap(),
        report["p_max_Pa"].as_f64().unwrap()
    );
    assert_eq!(fields[6], "true");
}

#[test]
fn sweep_flags_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = case1();
    c["variants"] = json!(["piezo", "modified"]);
    let config = write_json(dir.path(), "c.json", &c);
    let grid = write_json(
        dir.path(),
        "g.json",
        &json!({"alpha": [5.59e-8, 1.75e-7, 1e-5], "h0_over_R": [1e-4, 1e-3]}),
    );
    let out = dir.path().join("sweep");
    assert_eq!(sweep(&config, &grid, &out, "4"), 0);
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3 * 2 * 2);
    // both reference cases converge for every variant
    for (alpha, ratio) in [("5.59e-8", "1e-4"), ("1.75e-7", "1e-3")] {
        let cells: Vec<_> = rows
            .iter()
            .filter(|r| r[0] == alpha && r[1] == ratio)
            .collect();
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|r| r[6] == "true"), "{alpha} {ratio}");
    }
    for r in rows.iter().filter(|r| r[0] == "1e-5") {
        assert_eq!(r[6], "false");
        assert_eq!(r[7], "ellipticity_loss");
    }
}

#[test]
fn csv_output_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_json(dir.path(), "c.json", &case1());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(solve(&config, "modified", &a, &["--workers", "1"]), 0);
    let status = Command::new(env!("CARGO_BIN_EXE_modreyn"))
        .args([
            "solve",
            "--config",
            config.to_str().unwrap(),
            "--variant",
            "modified",
            "--out",
            b.to_str().unwrap(),
        ])
        .env("MODREYN_WORKERS", "8")
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "pressure.csv",
        "viscosity.csv",
        "velocity.csv",
        "convergence.csv",
    ] {
        let (x, y) = (
            fs::read(a.join("modified").join(name)).unwrap(),
            fs::read(b.join("modified").join(name)).unwrap(),
        );
        assert!(x == y, "{name} differs");
    }
}
