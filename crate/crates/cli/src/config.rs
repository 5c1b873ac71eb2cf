//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use apdiff_core::io::{ComponentJson, FieldJson, ModeJson};
use apdiff_core::{FrequencyLattice, Integrator, JsonState, SolverConfig, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Geodesic,
    Eulerian,
    Burgers,
    ExpLie,
    Norms,
    Verify,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Geodesic => "geodesic",
            Self::Eulerian => "eulerian",
            Self::Burgers => "burgers",
            Self::ExpLie => "exp-lie",
            Self::Norms => "norms",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n: usize,
    pub d: usize,
    /// `n` rows of `d` generators.
    pub omega: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_integrator")]
    pub integrator: String,
    /// Torus grid per axis; the lattice default when absent.
    #[serde(rename = "M", default)]
    pub m: Option<usize>,
    #[serde(default = "default_tol")]
    pub inversion_tol: f64,
    #[serde(default = "default_max_iter")]
    pub inversion_max_iter: usize,
    #[serde(default = "default_stride")]
    pub energy_log_stride: usize,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    1.0
}
fn default_integrator() -> String {
    "rk4".into()
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    200
}
fn default_stride() -> usize {
    1
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_final: default_t_final(),
            integrator: default_integrator(),
            m: None,
            inversion_tol: default_tol(),
            inversion_max_iter: default_max_iter(),
            energy_log_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSpec {
    /// Polynomial JSON file, relative to the config file.
    pub input: PathBuf,
    #[serde(default)]
    pub m: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    pub grid: usize,
    /// Uniform offsets `h_max·j/count` instead of the dyadic default.
    #[serde(default)]
    pub uniform_offsets: Option<usize>,
    /// Also report the little-Hölder profile for each `gamma`.
    #[serde(default)]
    pub profile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub solver: SolverSpec,
    /// One mode list per component.
    #[serde(default)]
    pub initial_velocity: Vec<Vec<ModeJson>>,
    #[serde(default)]
    pub norms: Option<NormsSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    1.0
}

/// A parsed config together with its source bytes and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub bytes: Vec<u8>,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_bytes(bytes, base_dir)
    }

    pub fn from_bytes(bytes: Vec<u8>, base_dir: PathBuf) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            serde_json::from_slice(&bytes).map_err(|e| CliError::Config(e.to_string()))?;
        let loaded = Self {
            config,
            bytes,
            base_dir,
        };
        loaded.check()?;
        Ok(loaded)
    }

    fn check(&self) -> Result<(), CliError> {
        let c = &self.config;
        match c.experiment {
            Experiment::Verify => return Ok(()),
            Experiment::Norms => {
                let spec = c
                    .norms
                    .as_ref()
                    .ok_or_else(|| CliError::Config("norms experiment needs a \"norms\" block".into()))?;
                let input = self.resolve(&spec.input);
                if !input.is_file() {
                    return Err(CliError::Config(format!("input file {} does not exist", input.display())));
                }
                if spec.grid == 0 {
                    return Err(CliError::Config("norms grid must be positive".into()));
                }
                return Ok(());
            }
            _ => {}
        }
        let lattice = self.lattice()?;
        self.solver_config(&lattice)?;
        let u0 = self.initial_velocity(&lattice)?;
        if c.experiment == Experiment::Burgers && u0.n() != 1 {
            return Err(CliError::Config("burgers runs need n = 1".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn lattice(&self) -> Result<Arc<FrequencyLattice>, CliError> {
        let spec = self
            .config
            .lattice
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"lattice\" block".into()))?;
        if spec.omega.len() != spec.n || spec.omega.iter().any(|r| r.len() != spec.d) {
            return Err(CliError::Config(format!(
                "omega must have {} rows of {} entries",
                spec.n, spec.d
            )));
        }
        FrequencyLattice::new(&spec.omega, spec.k)
            .map(Arc::new)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self, lattice: &FrequencyLattice) -> Result<SolverConfig, CliError> {
        let s = &self.config.solver;
        let integrator: Integrator = s.integrator.parse().map_err(|e: apdiff_core::ApError| CliError::Config(e.to_string()))?;
        let mut cfg = SolverConfig::for_lattice(lattice)
            .with_alpha(self.config.alpha)
            .with_dt(s.dt)
            .with_t_final(s.t_final)
            .with_stride(s.energy_log_stride);
        cfg.integrator = integrator;
        if let Some(m) = s.m {
            cfg = cfg.with_grid(m);
        }
        cfg.inversion_tol = s.inversion_tol;
        cfg.inversion_max_iter = s.inversion_max_iter;
        cfg.validate(lattice).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn initial_velocity(&self, lattice: &Arc<FrequencyLattice>) -> Result<VectorField, CliError> {
        let comps = &self.config.initial_velocity;
        if comps.len() != lattice.n() {
            return Err(CliError::Config(format!(
                "initial_velocity has {} components, lattice has n = {}",
                comps.len(),
                lattice.n()
            )));
        }
        let json = FieldJson {
            n: lattice.n(),
            d: lattice.d(),
            omega: lattice.omega_rows(),
            k: lattice.k_max(),
            components: comps.iter().map(|m| ComponentJson { modes: m.clone() }).collect(),
        };
        VectorField::from_json_repr(&json).map_err(|e| CliError::Config(e.to_string()))
    }
}
