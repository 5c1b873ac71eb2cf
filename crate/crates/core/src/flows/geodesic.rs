//! Riemannian geodesics of the right-invariant metric `ν_α` in Lagrangian
//! form: `φ̇ = v`, `v̇ = R_φ A_α⁻¹ B_α R_{φ⁻¹} v`.

use crate::algebra::{inner_product_alpha, invert_a_alpha, MetricParams, VectorField};
use crate::diffeo::{inverse_samples, make_diffeo, ApDiffeo};
use crate::error::{ApError, Result};
use crate::torus::{compose_displacement, compose_on_shifts, TorusGrid};

use super::config::{Integrator, SolverConfig};
use super::kernels::b_alpha_with_samples;
use super::StepRecord;

/// A point `(φ, v)` of the tangent bundle, `v = u ∘ φ`.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub phi: ApDiffeo,
    pub v: VectorField,
    pub t: f64,
}

impl GeodesicState {
    pub fn initial(u0: &VectorField) -> Self {
        Self {
            phi: ApDiffeo::identity(u0.lattice()),
            v: u0.clone(),
            t: 0.0,
        }
    }
}

/// Diagnostics from one right-hand-side evaluation.
#[derive(Debug, Clone, Default)]
pub(crate) struct RhsInfo {
    pub energy: f64,
    pub sup_u: f64,
    pub aliased_mass: f64,
    pub inversion_iters: usize,
}

pub(crate) struct GeodesicRhs {
    grid: TorusGrid,
    params: MetricParams,
    cfg: SolverConfig,
    warm: Option<Vec<Vec<f64>>>,
}

impl GeodesicRhs {
    pub fn new(u0: &VectorField, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(u0.lattice())?;
        Ok(Self {
            grid: TorusGrid::new(u0.lattice(), cfg.grid)?,
            params: MetricParams::new(cfg.alpha)?,
            cfg: cfg.clone(),
            warm: None,
        })
    }

    /// `v̇` at `(id + f, v)`. The inverse is only needed at grid points, so
    /// the converged samples are used without projecting them.
    pub fn eval(&mut self, f: &VectorField, v: &VectorField) -> Result<(VectorField, RhsInfo)> {
        let inv = inverse_samples(f, &self.cfg.inversion(), self.warm.as_deref())?;
        let u_rep = compose_on_shifts(&self.grid, v, &inv.values)?;
        let iterations = inv.iterations;
        self.warm = Some(inv.values);
        let u = u_rep.result;
        let (b, samples) = b_alpha_with_samples(&self.grid, &u, self.params)?;
        let w = invert_a_alpha(&b, self.params);
        let dv_rep = compose_displacement(&self.grid, &w, f)?;
        let info = RhsInfo {
            energy: inner_product_alpha(&u, &u, self.params)?,
            sup_u: samples.sup_value(),
            aliased_mass: u_rep.aliased_mass + dv_rep.aliased_mass,
            inversion_iters: iterations,
        };
        Ok((dv_rep.result, info))
    }
}

/// `(φ̇, v̇)` at a state.
pub fn geodesic_rhs(s: &GeodesicState, cfg: &SolverConfig) -> Result<(VectorField, VectorField)> {
    let mut rhs = GeodesicRhs::new(&s.v, cfg)?;
    let (dv, _) = rhs.eval(s.phi.displacement(), &s.v)?;
    Ok((s.v.clone(), dv))
}

/// `Σ cᵢ·fᵢ` added to `base`.
pub(crate) fn combine(base: &VectorField, terms: &[(f64, &VectorField)]) -> Result<VectorField> {
    let mut acc = base.clone();
    for (c, f) in terms {
        acc = VectorField::linear_combine(1.0, &acc, *c, f)?;
    }
    Ok(acc)
}

/// Stepper for the Lagrangian geodesic system.
pub struct GeodesicSolver {
    cfg: SolverConfig,
    rhs: GeodesicRhs,
    state: GeodesicState,
    steps: Vec<f64>,
    step_index: usize,
    m_check: usize,
    records: Vec<StepRecord>,
}

/// Output of [`integrate_geodesic`].
#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub records: Vec<StepRecord>,
    pub final_state: GeodesicState,
}

impl GeodesicSolver {
    pub fn new(u0: &VectorField, cfg: &SolverConfig) -> Result<Self> {
        let rhs = GeodesicRhs::new(u0, cfg)?;
        Ok(Self {
            cfg: cfg.clone(),
            rhs,
            state: GeodesicState::initial(u0),
            steps: cfg.steps(),
            step_index: 0,
            m_check: cfg.check_grid(u0.lattice()),
            records: Vec::new(),
        })
    }

    pub fn state(&self) -> &GeodesicState {
        &self.state
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn is_finished(&self) -> bool {
        self.step_index >= self.steps.len()
    }

    fn record(&mut self, info: &RhsInfo) {
        self.records.push(StepRecord {
            t: self.state.t,
            energy: info.energy,
            sup_norm_u: info.sup_u,
            margin: Some(self.state.phi.margin()),
            aliased_mass: info.aliased_mass,
            inversion_iters: info.inversion_iters,
        });
    }

    /// Advances one step. Failures are reported as [`ApError::StepFailure`]
    /// and leave the state untouched.
    pub fn step(&mut self) -> Result<()> {
        if self.is_finished() {
            return Ok(());
        }
        let t = self.state.t;
        let h = self.steps[self.step_index];
        self.advance(h)
            .map_err(|e| ApError::StepFailure { t, cause: Box::new(e) })
    }

    fn advance(&mut self, h: f64) -> Result<()> {
        let f0 = self.state.phi.displacement().clone();
        let v0 = self.state.v.clone();
        let (a1, info) = self.rhs.eval(&f0, &v0)?;
        if self.step_index.is_multiple_of(self.cfg.energy_log_stride) {
            self.record(&info);
        }
        let k1 = (v0.clone(), a1);
        let (f_new, v_new) = match self.cfg.integrator {
            Integrator::Rk4 => {
                let f2 = combine(&f0, &[(0.5 * h, &k1.0)])?;
                let v2 = combine(&v0, &[(0.5 * h, &k1.1)])?;
                let (a2, _) = self.rhs.eval(&f2, &v2)?;
                let k2 = (v2, a2);
                let f3 = combine(&f0, &[(0.5 * h, &k2.0)])?;
                let v3 = combine(&v0, &[(0.5 * h, &k2.1)])?;
                let (a3, _) = self.rhs.eval(&f3, &v3)?;
                let k3 = (v3, a3);
                let f4 = combine(&f0, &[(h, &k3.0)])?;
                let v4 = combine(&v0, &[(h, &k3.1)])?;
                let (a4, _) = self.rhs.eval(&f4, &v4)?;
                let k4 = (v4, a4);
                let w = h / 6.0;
                (
                    combine(&f0, &[(w, &k1.0), (2.0 * w, &k2.0), (2.0 * w, &k3.0), (w, &k4.0)])?,
                    combine(&v0, &[(w, &k1.1), (2.0 * w, &k2.1), (2.0 * w, &k3.1), (w, &k4.1)])?,
                )
            }
            Integrator::Heun => {
                let f2 = combine(&f0, &[(h, &k1.0)])?;
                let v2 = combine(&v0, &[(h, &k1.1)])?;
                let (a2, _) = self.rhs.eval(&f2, &v2)?;
                (
                    combine(&f0, &[(0.5 * h, &k1.0), (0.5 * h, &v2)])?,
                    combine(&v0, &[(0.5 * h, &k1.1), (0.5 * h, &a2)])?,
                )
            }
        };
        let phi = make_diffeo(f_new, 0.0, self.m_check)?;
        self.state = GeodesicState {
            phi,
            v: v_new,
            t: self.state.t + h,
        };
        self.step_index += 1;
        if self.is_finished() {
            self.state.t = self.cfg.t_final;
        }
        Ok(())
    }

    /// Records diagnostics at the current (final) state.
    pub fn record_final(&mut self) -> Result<()> {
        let (_, info) = self.rhs.eval(self.state.phi.displacement(), &self.state.v)?;
        self.record(&info);
        Ok(())
    }

    pub fn into_trajectory(self) -> GeodesicTrajectory {
        GeodesicTrajectory {
            records: self.records,
            final_state: self.state,
        }
    }
}

/// Integrates the geodesic from `(id, u0)` over `[0, t_final]`.
pub fn integrate_geodesic(u0: &VectorField, cfg: &SolverConfig) -> Result<GeodesicTrajectory> {
    let mut solver = GeodesicSolver::new(u0, cfg)?;
    while !solver.is_finished() {
        solver.step()?;
    }
    let t = solver.state.t;
    solver
        .record_final()
        .map_err(|e| ApError::StepFailure { t, cause: Box::new(e) })?;
    Ok(solver.into_trajectory())
}

/// Riemannian exponential `u0 ↦ φ(1)`; requires `α > 0`.
pub fn exp_riemannian(u0: &VectorField, cfg: &SolverConfig) -> Result<ApDiffeo> {
    if !(cfg.alpha > 0.0) {
        return Err(ApError::InvalidParameter(
            "the Riemannian exponential requires alpha > 0".into(),
        ));
    }
    let cfg = cfg.clone().with_t_final(1.0).with_stride(usize::MAX);
    let mut solver = GeodesicSolver::new(u0, &cfg)?;
    while !solver.is_finished() {
        solver.step()?;
    }
    Ok(solver.state.phi)
}

/// `ν_α(φ)(ξ, η) = ⟨ξ∘φ⁻¹, η∘φ⁻¹⟩_α`.
pub fn metric_nu_alpha(
    phi: &ApDiffeo,
    xi: &VectorField,
    eta: &VectorField,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let params = MetricParams::new(alpha)?;
    let grid = TorusGrid::new(phi.lattice(), cfg.grid)?;
    let inv = inverse_samples(phi.displacement(), &cfg.inversion(), None)?;
    let a = compose_on_shifts(&grid, xi, &inv.values)?.result;
    let b = compose_on_shifts(&grid, eta, &inv.values)?.result;
    inner_product_alpha(&a, &b, params)
}

/// `ν_α(φ)(v, v)` at a state.
pub fn energy(s: &GeodesicState, alpha: f64, cfg: &SolverConfig) -> Result<f64> {
    metric_nu_alpha(&s.phi, &s.v, &s.v, alpha, cfg)
}

/// Eulerian velocity `u = v ∘ φ⁻¹` of a state.
pub fn eulerian_velocity(s: &GeodesicState, cfg: &SolverConfig) -> Result<VectorField> {
    let grid = TorusGrid::new(s.phi.lattice(), cfg.grid)?;
    let inv = inverse_samples(s.phi.displacement(), &cfg.inversion(), None)?;
    Ok(compose_on_shifts(&grid, &s.v, &inv.values)?.result)
}
