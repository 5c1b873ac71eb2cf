use crate::diffeo::{default_check_grid, InversionOptions};
use crate::error::{ApError, Result};
use crate::lattice::FrequencyLattice;
use crate::torus::{default_grid, min_product_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    Heun,
}

impl std::str::FromStr for Integrator {
    type Err = ApError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "heun" => Ok(Self::Heun),
            other => Err(ApError::InvalidParameter(format!("unknown integrator '{other}'"))),
        }
    }
}

impl Integrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::Heun => "heun",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    /// Torus grid per axis for compositions, inversions and products.
    pub grid: usize,
    pub inversion_tol: f64,
    pub inversion_max_iter: usize,
    /// Record diagnostics every this many steps.
    pub energy_log_stride: usize,
    /// Jacobian validation grid; defaults to `4(2K+1)`.
    pub m_check: Option<usize>,
}

impl SolverConfig {
    /// Defaults for a lattice: `α = 1`, `dt = 1e-3`, `t ∈ [0, 1]`, RK4 on the
    /// oversampled grid.
    pub fn for_lattice(lattice: &FrequencyLattice) -> Self {
        Self {
            alpha: 1.0,
            dt: 1e-3,
            t_final: 1.0,
            integrator: Integrator::Rk4,
            grid: default_grid(lattice),
            inversion_tol: 1e-12,
            inversion_max_iter: 200,
            energy_log_stride: 1,
            m_check: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_final(mut self, t: f64) -> Self {
        self.t_final = t;
        self
    }

    pub fn with_grid(mut self, m: usize) -> Self {
        self.grid = m;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.energy_log_stride = stride;
        self
    }

    pub fn validate(&self, lattice: &FrequencyLattice) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ApError::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(ApError::InvalidParameter(format!(
                "t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(ApError::InvalidParameter(format!(
                "alpha must be nonnegative, got {}",
                self.alpha
            )));
        }
        let required = min_product_grid(lattice);
        if self.grid < required {
            return Err(ApError::GridTooSmall {
                m: self.grid,
                required,
            });
        }
        if self.energy_log_stride == 0 {
            return Err(ApError::InvalidParameter("energy_log_stride must be at least 1".into()));
        }
        if !(self.inversion_tol > 0.0) || self.inversion_max_iter == 0 {
            return Err(ApError::InvalidParameter("invalid inversion settings".into()));
        }
        Ok(())
    }

    pub fn inversion(&self) -> InversionOptions {
        InversionOptions {
            tol: self.inversion_tol,
            max_iter: self.inversion_max_iter,
            grid: Some(self.grid),
        }
    }

    pub fn check_grid(&self, lattice: &FrequencyLattice) -> usize {
        self.m_check.unwrap_or_else(|| default_check_grid(lattice))
    }

    /// Step sizes covering `[0, t_final]`; the last step absorbs the
    /// remainder when `t_final` is not a multiple of `dt`.
    pub fn steps(&self) -> Vec<f64> {
        if self.t_final == 0.0 {
            return Vec::new();
        }
        let ratio = self.t_final / self.dt;
        let mut count = ratio.round();
        if (ratio - count).abs() > 1e-9 * ratio.max(1.0) {
            count = ratio.ceil();
        }
        let count = count.max(1.0) as usize;
        let mut out = vec![self.dt; count];
        let last = self.t_final - self.dt * (count - 1) as f64;
        out[count - 1] = last;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_partition() {
        let lat = FrequencyLattice::one_dim(&[1.0], 4).unwrap();
        let cfg = SolverConfig::for_lattice(&lat).with_dt(0.1).with_t_final(1.0);
        let s = cfg.steps();
        assert_eq!(s.len(), 10);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let cfg = cfg.with_dt(0.3);
        let s = cfg.steps();
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.1).abs() < 1e-12);
        assert!(cfg.with_t_final(0.0).steps().is_empty());
    }

    #[test]
    fn rejects_bad_settings() {
        let lat = FrequencyLattice::one_dim(&[1.0], 4).unwrap();
        let cfg = SolverConfig::for_lattice(&lat);
        assert!(cfg.validate(&lat).is_ok());
        assert!(cfg.clone().with_dt(0.0).validate(&lat).is_err());
        assert!(cfg.clone().with_t_final(-1.0).validate(&lat).is_err());
        assert!(matches!(
            cfg.clone().with_grid(12).validate(&lat),
            Err(ApError::GridTooSmall { .. })
        ));
        assert_eq!("heun".parse::<Integrator>().unwrap(), Integrator::Heun);
    }
}
