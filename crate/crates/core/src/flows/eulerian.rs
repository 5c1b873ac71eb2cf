//! Eulerian form `m_t + (∇m)u + (div u·I + (∇u)ᵀ)m = 0`, `m = A_α u`.

use crate::algebra::{apply_a_alpha, inner_product_alpha, invert_a_alpha, MetricParams, VectorField};
use crate::error::{ApError, Result};
use crate::torus::TorusGrid;

use super::config::SolverConfig;
use super::geodesic::combine;
use super::kernels::{transport_terms, FieldSamples};
use super::{Integrator, StepRecord};

#[derive(Debug, Clone)]
pub struct EulerianState {
    pub u: VectorField,
    /// Momentum `A_α u`.
    pub m: VectorField,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct EulerianTrajectory {
    pub records: Vec<StepRecord>,
    pub final_state: EulerianState,
}

struct Rhs {
    grid: TorusGrid,
    params: MetricParams,
    grad_limit: f64,
}

impl Rhs {
    /// `m_t` together with `sup|u|` at the stage.
    fn eval(&self, m: &VectorField) -> Result<(VectorField, f64)> {
        let u = invert_a_alpha(m, self.params);
        let us = FieldSamples::new(&self.grid, &u);
        let grad = us.sup_grad();
        if !(grad <= self.grad_limit) {
            return Err(ApError::InvalidParameter(format!(
                "velocity gradient {grad:.3e} exceeds the stability guard {:.3e}",
                self.grad_limit
            )));
        }
        let ms = FieldSamples::new(&self.grid, m);
        let t = VectorField::new(transport_terms(&self.grid, &us, &ms))?;
        Ok((t.scaled(-1.0), us.sup_value()))
    }
}

/// Stepper for the Eulerian system. Any stage with `sup|∇u| > 1/(10·dt)`
/// fails the step.
pub struct EulerianSolver {
    cfg: SolverConfig,
    rhs: Rhs,
    state: EulerianState,
    steps: Vec<f64>,
    step_index: usize,
    records: Vec<StepRecord>,
}

impl EulerianSolver {
    pub fn new(u0: &VectorField, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(u0.lattice())?;
        let params = MetricParams::new(cfg.alpha)?;
        let rhs = Rhs {
            grid: TorusGrid::new(u0.lattice(), cfg.grid)?,
            params,
            grad_limit: 1.0 / (10.0 * cfg.dt),
        };
        Ok(Self {
            cfg: cfg.clone(),
            rhs,
            state: EulerianState {
                u: u0.clone(),
                m: apply_a_alpha(u0, params),
                t: 0.0,
            },
            steps: cfg.steps(),
            step_index: 0,
            records: Vec::new(),
        })
    }

    pub fn state(&self) -> &EulerianState {
        &self.state
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn is_finished(&self) -> bool {
        self.step_index >= self.steps.len()
    }

    fn record(&mut self, sup: f64) {
        self.records.push(StepRecord {
            t: self.state.t,
            energy: inner_product_alpha(&self.state.u, &self.state.u, self.rhs.params).unwrap_or(f64::NAN),
            sup_norm_u: sup,
            margin: None,
            aliased_mass: 0.0,
            inversion_iters: 0,
        });
    }

    /// Advances one step; a failure leaves the state untouched.
    pub fn step(&mut self) -> Result<()> {
        if self.is_finished() {
            return Ok(());
        }
        let t = self.state.t;
        self.advance()
            .map_err(|e| ApError::StepFailure { t, cause: Box::new(e) })
    }

    fn advance(&mut self) -> Result<()> {
        let h = self.steps[self.step_index];
        let m0 = &self.state.m;
        let rhs = &self.rhs;
        let (k1, sup) = rhs.eval(m0)?;
        let m_new = match self.cfg.integrator {
            Integrator::Rk4 => {
                let (k2, _) = rhs.eval(&combine(m0, &[(0.5 * h, &k1)])?)?;
                let (k3, _) = rhs.eval(&combine(m0, &[(0.5 * h, &k2)])?)?;
                let (k4, _) = rhs.eval(&combine(m0, &[(h, &k3)])?)?;
                let w = h / 6.0;
                combine(m0, &[(w, &k1), (2.0 * w, &k2), (2.0 * w, &k3), (w, &k4)])?
            }
            Integrator::Heun => {
                let (k2, _) = rhs.eval(&combine(m0, &[(h, &k1)])?)?;
                combine(m0, &[(0.5 * h, &k1), (0.5 * h, &k2)])?
            }
        };
        if self.step_index.is_multiple_of(self.cfg.energy_log_stride) {
            self.record(sup);
        }
        self.step_index += 1;
        self.state = EulerianState {
            u: invert_a_alpha(&m_new, self.rhs.params),
            m: m_new,
            t: if self.is_finished() { self.cfg.t_final } else { self.state.t + h },
        };
        Ok(())
    }

    /// Records diagnostics at the current (final) state.
    pub fn record_final(&mut self) -> Result<()> {
        let (_, sup) = self.rhs.eval(&self.state.m)?;
        self.record(sup);
        Ok(())
    }

    pub fn into_trajectory(self) -> EulerianTrajectory {
        EulerianTrajectory {
            records: self.records,
            final_state: self.state,
        }
    }
}

/// Integrates the Eulerian system from `u0` over `[0, t_final]`.
pub fn integrate_eulerian_ch(u0: &VectorField, cfg: &SolverConfig) -> Result<EulerianTrajectory> {
    let mut solver = EulerianSolver::new(u0, cfg)?;
    while !solver.is_finished() {
        solver.step()?;
    }
    let t = solver.state.t;
    solver
        .record_final()
        .map_err(|e| ApError::StepFailure { t, cause: Box::new(e) })?;
    Ok(solver.into_trajectory())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TrigPoly;
    use crate::lattice::FrequencyLattice;
    use std::sync::Arc;

    fn lat() -> Arc<FrequencyLattice> {
        Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 8).unwrap())
    }

    #[test]
    fn constant_is_stationary() {
        let l = lat();
        let c = VectorField::constant(&l, &[1.5]).unwrap();
        let cfg = SolverConfig::for_lattice(&l).with_grid(36).with_dt(0.05);
        let tr = integrate_eulerian_ch(&c, &cfg).unwrap();
        assert!(tr.final_state.u.max_coeff_diff(&c).unwrap() < 1e-15);
        assert_eq!(tr.records.len(), 21);
    }

    #[test]
    fn momentum_tracks_velocity() {
        let l = lat();
        let u0 = VectorField::scalar(TrigPoly::cos_mode(&l, &[1, 1], 0.3).unwrap()).unwrap();
        let cfg = SolverConfig::for_lattice(&l).with_grid(36).with_dt(0.01).with_t_final(0.2);
        let s = integrate_eulerian_ch(&u0, &cfg).unwrap().final_state;
        let m = apply_a_alpha(&s.u, MetricParams::new(1.0).unwrap());
        assert!(s.m.max_coeff_diff(&m).unwrap() < 1e-12);
    }

    #[test]
    fn odd_data_stays_odd() {
        // x ↦ −x maps solutions to solutions only together with u ↦ −u, so
        // odd data stays odd while even data does not stay even.
        let l = lat();
        let u0 = TrigPoly::sin_mode(&l, &[1, 0], 0.4)
            .unwrap()
            .add(&TrigPoly::sin_mode(&l, &[0, 1], 0.2).unwrap())
            .unwrap();
        let cfg = SolverConfig::for_lattice(&l).with_grid(36).with_dt(0.01).with_t_final(0.5);
        let s = integrate_eulerian_ch(&VectorField::scalar(u0).unwrap(), &cfg)
            .unwrap()
            .final_state;
        let c = s.u.component(0).coeffs();
        let even: f64 = c.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        assert!(even < 1e-15, "{even}");

        let e0 = TrigPoly::cos_mode(&l, &[1, 0], 0.4).unwrap();
        let s = integrate_eulerian_ch(&VectorField::scalar(e0).unwrap(), &cfg)
            .unwrap()
            .final_state;
        let odd: f64 = s.u.component(0).coeffs().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(odd > 1e-3);
    }

    #[test]
    fn gradient_guard_stops_the_run() {
        let l = lat();
        let u0 = VectorField::scalar(TrigPoly::cos_mode(&l, &[1, 0], 1.0).unwrap()).unwrap();
        let cfg = SolverConfig::for_lattice(&l).with_grid(36).with_dt(1.0).with_t_final(2.0);
        match integrate_eulerian_ch(&u0, &cfg) {
            Err(ApError::StepFailure { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("expected a step failure, got {other:?}"),
        }
    }
}
