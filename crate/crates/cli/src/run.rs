//! Experiment runners behind `apdiff run`.

use std::path::Path;
use std::time::Instant;

use apdiff_core::flows::{EulerianSolver, GeodesicSolver};
use apdiff_core::{
    burgers_solution, exp_lie, inner_product_alpha, ApError, JsonState, MetricParams,
    SolverConfig, StepRecord, TorusGrid, TrigPoly, VectorField,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, LoadedConfig};
use crate::error::CliError;
use crate::norms::{compute_norms, load_poly, norms_csv, NormsRequest};
use crate::output::{sha256_hex, trajectory_csv, Manifest, OutputDir};
use crate::pool::worker_pool;
use crate::verify::{run_suite, SuiteOptions};

pub const TRAJECTORY: &str = "trajectory.csv";
pub const FINAL_STATE: &str = "final_state.json";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const NORMS_REPORT: &str = "report.csv";
pub const VERIFY_REPORT: &str = "verification.csv";

/// Result of a run that reached its end.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub warnings: Vec<String>,
}

struct Outcome {
    status: Result<(), CliError>,
    warnings: Vec<String>,
}

/// Runs one experiment into `out`. Solver failures still produce a manifest
/// covering the partial trajectory and the last good checkpoint.
pub fn run_experiment(cfg: &LoadedConfig, out: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let outcome = match cfg.config.experiment {
        Experiment::Geodesic => run_geodesic(cfg, &mut dir)?,
        Experiment::Eulerian => run_eulerian(cfg, &mut dir)?,
        Experiment::Burgers => run_burgers(cfg, &mut dir)?,
        Experiment::ExpLie => run_exp_lie(cfg, &mut dir)?,
        Experiment::Norms => run_norms(cfg, &mut dir)?,
        Experiment::Verify => run_verify(cfg, &mut dir)?,
    };
    let (status, message) = match &outcome.status {
        Ok(()) => ("ok", None),
        Err(e @ CliError::Solver { .. }) => ("solver-failure", Some(e.to_string())),
        Err(e) => ("failed", Some(e.to_string())),
    };
    let manifest = dir.finish(Manifest {
        toolkit: "apdiff".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.config.experiment.as_str().into(),
        seed: cfg.config.seed,
        config_sha256: sha256_hex(&cfg.bytes),
        wall_time_s: start.elapsed().as_secs_f64(),
        status: status.into(),
        message,
        files: Vec::new(),
    })?;
    outcome.status.map(|()| RunSummary {
        manifest,
        warnings: outcome.warnings,
    })
}

/// Runs several configs concurrently on the bounded worker pool; each one
/// writes into its own subdirectory of `out`, named after the config file.
pub fn run_many(configs: &[(String, LoadedConfig)], out: &Path) -> Vec<(String, Result<RunSummary, CliError>)> {
    worker_pool().install(|| {
        configs
            .par_iter()
            .map(|(name, cfg)| (name.clone(), run_experiment(cfg, &out.join(name))))
            .collect()
    })
}

fn config_err(e: ApError) -> CliError {
    CliError::Config(e.to_string())
}

fn sup_on_grid(u: &VectorField, m: usize) -> f64 {
    TorusGrid::new(u.lattice(), m)
        .map(|g| {
            u.components()
                .iter()
                .flat_map(|c| g.sample(c))
                .fold(0.0, |a: f64, v| a.max(v.abs()))
        })
        .unwrap_or(f64::NAN)
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    serde_json::to_string_pretty(v).expect("json").into_bytes()
}

fn solver_failure(dir: &mut OutputDir, error: ApError, checkpoint: Option<serde_json::Value>) -> Result<CliError, CliError> {
    let path = match checkpoint {
        Some(c) => Some(dir.write(CHECKPOINT, &json_bytes(&c))?),
        None => None,
    };
    Ok(CliError::Solver {
        error,
        checkpoint: path,
    })
}

fn setup(cfg: &LoadedConfig) -> Result<(SolverConfig, VectorField), CliError> {
    let lattice = cfg.lattice()?;
    let sc = cfg.solver_config(&lattice)?;
    let u0 = cfg.initial_velocity(&lattice)?;
    Ok((sc, u0))
}

fn run_geodesic(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let (sc, u0) = setup(cfg)?;
    let mut warnings = Vec::new();
    if sc.alpha == 0.0 {
        warnings.push("alpha = 0: the geodesic equation is only formally defined (Burgers limit)".to_string());
    }
    let mut solver = GeodesicSolver::new(&u0, &sc).map_err(config_err)?;
    while !solver.is_finished() {
        if let Err(e) = solver.step() {
            dir.write(TRAJECTORY, trajectory_csv(solver.records()).as_bytes())?;
            let state = serde_json::to_value(solver.state().to_json_repr()).expect("json");
            let err = solver_failure(dir, e, Some(state))?;
            return Ok(Outcome {
                status: Err(err),
                warnings,
            });
        }
    }
    let status = match solver.record_final() {
        Ok(()) => Ok(()),
        Err(e) => Err(solver_failure(dir, e, Some(serde_json::to_value(solver.state().to_json_repr()).expect("json")))?),
    };
    dir.write(TRAJECTORY, trajectory_csv(solver.records()).as_bytes())?;
    dir.write(FINAL_STATE, solver.state().to_json().as_bytes())?;
    Ok(Outcome { status, warnings })
}

fn timed_field(t: f64, u: &VectorField) -> serde_json::Value {
    json!({ "t": t, "u": u.to_json_repr() })
}

fn run_eulerian(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let (sc, u0) = setup(cfg)?;
    let mut solver = EulerianSolver::new(&u0, &sc).map_err(config_err)?;
    while !solver.is_finished() {
        if let Err(e) = solver.step() {
            dir.write(TRAJECTORY, trajectory_csv(solver.records()).as_bytes())?;
            let s = solver.state();
            let err = solver_failure(dir, e, Some(timed_field(s.t, &s.u)))?;
            return Ok(Outcome {
                status: Err(err),
                warnings: Vec::new(),
            });
        }
    }
    let status = solver.record_final().map_err(|error| CliError::Solver {
        error,
        checkpoint: None,
    });
    dir.write(TRAJECTORY, trajectory_csv(solver.records()).as_bytes())?;
    let s = solver.state();
    dir.write(FINAL_STATE, &json_bytes(&timed_field(s.t, &s.u)))?;
    Ok(Outcome {
        status,
        warnings: Vec::new(),
    })
}

/// Logging times `0, stride·dt, 2·stride·dt, …, t_final`.
fn log_times(sc: &SolverConfig) -> Vec<f64> {
    let steps = sc.steps();
    let mut times = vec![0.0];
    let mut t = 0.0;
    for (j, h) in steps.iter().enumerate() {
        t += h;
        if j + 1 == steps.len() {
            times.push(sc.t_final);
        } else if (j + 1) % sc.energy_log_stride == 0 {
            times.push(t);
        }
    }
    times
}

fn run_burgers(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let (sc, u0) = setup(cfg)?;
    let params = MetricParams::new(sc.alpha).map_err(config_err)?;
    let u0 = u0.into_components().remove(0);
    let mut records = Vec::new();
    let mut last: Option<(f64, TrigPoly)> = None;
    for t in log_times(&sc) {
        match burgers_solution(&u0, t, &sc) {
            Ok(u) => {
                let field = VectorField::scalar(u.clone()).map_err(config_err)?;
                records.push(StepRecord {
                    t,
                    energy: inner_product_alpha(&field, &field, params).unwrap_or(f64::NAN),
                    sup_norm_u: sup_on_grid(&field, sc.grid),
                    margin: None,
                    aliased_mass: 0.0,
                    inversion_iters: 0,
                });
                last = Some((t, u));
            }
            Err(e) => {
                dir.write(TRAJECTORY, trajectory_csv(&records).as_bytes())?;
                let checkpoint = last.map(|(t, u)| json!({ "t": t, "u": u.to_json_repr() }));
                let err = solver_failure(dir, ApError::StepFailure { t, cause: Box::new(e) }, checkpoint)?;
                return Ok(Outcome {
                    status: Err(err),
                    warnings: Vec::new(),
                });
            }
        }
    }
    dir.write(TRAJECTORY, trajectory_csv(&records).as_bytes())?;
    let (t, u) = last.expect("at least t = 0 is logged");
    dir.write(FINAL_STATE, &json_bytes(&json!({ "t": t, "u": u.to_json_repr() })))?;
    Ok(Outcome {
        status: Ok(()),
        warnings: Vec::new(),
    })
}

fn run_exp_lie(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let (sc, u0) = setup(cfg)?;
    let params = MetricParams::new(sc.alpha).map_err(config_err)?;
    let energy = inner_product_alpha(&u0, &u0, params).map_err(config_err)?;
    let sup = sup_on_grid(&u0, sc.grid);
    let row = |t: f64, margin: f64| StepRecord {
        t,
        energy,
        sup_norm_u: sup,
        margin: Some(margin),
        aliased_mass: 0.0,
        inversion_iters: 0,
    };
    let mut records = vec![row(0.0, 1.0)];
    match exp_lie(&u0, &sc) {
        Ok(phi) => {
            records.push(row(1.0, phi.margin()));
            dir.write(TRAJECTORY, trajectory_csv(&records).as_bytes())?;
            dir.write(FINAL_STATE, phi.to_json().as_bytes())?;
            Ok(Outcome {
                status: Ok(()),
                warnings: Vec::new(),
            })
        }
        Err(e) => {
            dir.write(TRAJECTORY, trajectory_csv(&records).as_bytes())?;
            Ok(Outcome {
                status: Err(solver_failure(dir, e, None)?),
                warnings: Vec::new(),
            })
        }
    }
}

fn run_norms(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let spec = cfg.config.norms.as_ref().expect("checked on load");
    let f = load_poly(&cfg.resolve(&spec.input))?;
    let rows = compute_norms(
        &f,
        &NormsRequest {
            m: spec.m.clone(),
            gamma: spec.gamma.clone(),
            grid: spec.grid,
            uniform_offsets: spec.uniform_offsets,
            profile: spec.profile,
        },
    )?;
    dir.write(NORMS_REPORT, norms_csv(&rows).as_bytes())?;
    Ok(Outcome {
        status: Ok(()),
        warnings: Vec::new(),
    })
}

fn run_verify(cfg: &LoadedConfig, dir: &mut OutputDir) -> Result<Outcome, CliError> {
    let report = run_suite(&SuiteOptions {
        only: None,
        seed: cfg.config.seed,
    })?;
    dir.write(VERIFY_REPORT, report.to_csv().as_bytes())?;
    let failed = report.failed();
    Ok(Outcome {
        status: if failed == 0 {
            Ok(())
        } else {
            Err(CliError::Verification { failed })
        },
        warnings: Vec::new(),
    })
}
