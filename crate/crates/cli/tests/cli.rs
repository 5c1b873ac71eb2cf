use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use apdiff_cli::output::verify_manifest;
use apdiff_core::{load_state, FrequencyLattice, GeodesicState, JsonState, TrigPoly};
use serde_json::{json, Value};

fn apdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apdiff"))
        .args(args)
        .env("APDIFF_THREADS", "1")
        .output()
        .expect("spawn apdiff")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn small_lattice() -> Value {
    json!({ "n": 1, "d": 2, "omega": [[1.0, std::f64::consts::SQRT_2]], "K": 4 })
}

fn geodesic_config(u0: Value) -> Value {
    json!({
        "experiment": "geodesic",
        "lattice": small_lattice(),
        "alpha": 1.0,
        "solver": { "dt": 0.01, "t_final": 0.05, "M": 18 },
        "initial_velocity": [u0],
        "seed": 3
    })
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn constant_velocity_keeps_energy_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &geodesic_config(json!([{ "k": [0, 0], "re": 0.3, "im": 0.0 }])));
    let out = tmp.path().join("out");
    let o = apdiff(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let e = column(&csv, "energy");
    assert_eq!(e.len(), 6);
    assert!(e.iter().all(|v| (v - e[0]).abs() <= 1e-12));
    assert!(verify_manifest(&out).unwrap().is_empty());
    let state: GeodesicState = load_state(out.join("final_state.json")).unwrap();
    assert_eq!(state.t, 0.05);
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let u0 = json!([{ "k": [1, 0], "re": 0.05, "im": 0.0 }, { "k": [0, 1], "re": 0.0, "im": -0.02 }]);
    let cfg = write_config(tmp.path(), "g.json", &geodesic_config(u0));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = apdiff(&["run", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |d: &Path| std::fs::read(d.join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let manifest: Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "geodesic");
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn burgers_past_blowup_exits_with_solver_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "burgers",
        "lattice": small_lattice(),
        "alpha": 0.0,
        "solver": { "dt": 0.01, "t_final": 0.4, "M": 18 },
        "initial_velocity": [[{ "k": [1, 0], "re": 0.0, "im": -0.5 }]]
    });
    let cfg = write_config(tmp.path(), "b.json", &cfg);
    let out = tmp.path().join("out");
    let o = apdiff(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("blow-up time 0.333"), "{err}");
    let checkpoint: Value = serde_json::from_slice(&std::fs::read(out.join("checkpoint.json")).unwrap()).unwrap();
    let t = checkpoint["t"].as_f64().unwrap();
    assert!(t <= 0.3 && t > 0.25, "{t}");
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn eulerian_and_lie_runs_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for exp in ["eulerian", "exp-lie"] {
        let mut cfg = geodesic_config(json!([{ "k": [1, 0], "re": 0.05, "im": 0.0 }]));
        cfg["experiment"] = json!(exp);
        let path = write_config(tmp.path(), &format!("{exp}.json"), &cfg);
        let out = tmp.path().join(exp);
        let o = apdiff(&["run", "--config", &path, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{exp}: {}", stderr(&o));
        assert!(out.join("final_state.json").is_file());
        assert!(verify_manifest(&out).unwrap().is_empty());
    }
}

#[test]
fn several_configs_fan_out_into_subdirectories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "one.json", &geodesic_config(json!([{ "k": [1, 0], "re": 0.02, "im": 0.0 }])));
    let b = write_config(tmp.path(), "two.json", &geodesic_config(json!([{ "k": [0, 1], "re": 0.02, "im": 0.0 }])));
    let out = tmp.path().join("sweep");
    let o = apdiff(&["run", "--config", &a, "--config", &b, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["one", "two"] {
        assert!(verify_manifest(&out.join(name)).unwrap().is_empty());
    }
}

#[test]
fn alpha_zero_geodesic_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = geodesic_config(json!([{ "k": [1, 0], "re": 0.02, "im": 0.0 }]));
    cfg["alpha"] = json!(0.0);
    let path = write_config(tmp.path(), "a0.json", &cfg);
    let o = apdiff(&["run", "--config", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = geodesic_config(json!([]));
    cfg["unexpected"] = json!(1);
    let bad = write_config(tmp.path(), "bad.json", &cfg);
    let missing = write_config(
        tmp.path(),
        "missing.json",
        &json!({ "experiment": "norms", "norms": { "input": "nope.json", "grid": 64 } }),
    );
    let mut small = geodesic_config(json!([{ "k": [1, 0], "re": 0.02, "im": 0.0 }]));
    small["solver"]["M"] = json!(8);
    let small = write_config(tmp.path(), "grid.json", &small);
    let noncanonical = write_config(
        tmp.path(),
        "nc.json",
        &geodesic_config(json!([{ "k": [-1, 0], "re": 0.02, "im": 0.0 }])),
    );
    for path in [bad, missing, small, noncanonical] {
        let o = apdiff(&["run", "--config", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{path}: {}", stderr(&o));
    }
    let o = apdiff(&["run", "--config", tmp.path().join("absent.json").to_str().unwrap(), "--out", "x"]);
    assert_eq!(code(&o), 2);
}

fn sine_file(dir: &Path) -> String {
    let l = Arc::new(FrequencyLattice::one_dim(&[1.0], 2).unwrap());
    let p = dir.join("f.json");
    std::fs::write(&p, TrigPoly::sin_mode(&l, &[1], 1.0).unwrap().to_json()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn norms_command_reports_requested_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let f = sine_file(tmp.path());
    let out = tmp.path().join("report.csv");
    let o = apdiff(&[
        "norms", "--input", &f, "--m", "0.5", "--m", "1", "--gamma", "0.5", "--grid", "1024", "--profile",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(csv.lines().next().unwrap(), "quantity,gamma_or_m,grid,value,verdict");
    assert_eq!(rows[0][0], "sup_norm");
    let cm: Vec<_> = rows.iter().filter(|r| r[0] == "cm_norm").collect();
    assert_eq!(cm.len(), 2);
    // C^1 norm of sin is max(|sin|_∞, |cos|_∞).
    assert!((cm[1][3].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
    assert!(rows.iter().any(|r| r[0] == "little_holder_modulus" && r[4] == "vanishing"));
}

#[test]
fn norms_experiment_via_config() {
    let tmp = tempfile::tempdir().unwrap();
    sine_file(tmp.path());
    let cfg = write_config(
        tmp.path(),
        "n.json",
        &json!({
            "experiment": "norms",
            "norms": { "input": "f.json", "m": [1.5], "gamma": [], "grid": 512, "uniform_offsets": 256 }
        }),
    );
    let out = tmp.path().join("out");
    let o = apdiff(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("cm_norm,1.5,")));
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn verify_only_gives_a_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("v.csv");
    let o = apdiff(&["verify", "--only", "a_alpha", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&report).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("a_alpha,pass,"));
    let o = apdiff(&["verify", "--only", "no_such_check"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pass_pattern_does_not_depend_on_the_seed() {
    for seed in ["1", "2", "99"] {
        let o = apdiff(&["verify", "--only", "group_axioms,shift_equivariance,a_alpha", "--seed", seed]);
        assert_eq!(code(&o), 0, "seed {seed}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn list_names_every_check() {
    let o = apdiff(&["verify", "--list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 12);
}
