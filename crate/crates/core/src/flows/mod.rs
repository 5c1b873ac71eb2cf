//! Time integration on the group of almost periodic diffeomorphisms:
//! Lie-group and Riemannian exponentials, the Eulerian EPDiff system and
//! Burgers characteristics.

mod burgers;
mod config;
mod eulerian;
mod geodesic;
mod kernels;
mod lie;

pub use burgers::{blowup_time, burgers_solution};
pub use config::{Integrator, SolverConfig};
pub use eulerian::{integrate_eulerian_ch, EulerianSolver, EulerianState, EulerianTrajectory};
pub use geodesic::{
    energy, eulerian_velocity, exp_riemannian, geodesic_rhs, integrate_geodesic, metric_nu_alpha,
    GeodesicSolver, GeodesicState, GeodesicTrajectory,
};
pub use kernels::b_alpha;
pub use lie::{directional_derivative, exp_lie, gram_matrix, min_eigenvalue_sym};

/// Diagnostics logged along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub energy: f64,
    pub sup_norm_u: f64,
    /// Jacobian margin of `φ`; absent for Eulerian runs.
    pub margin: Option<f64>,
    pub aliased_mass: f64,
    pub inversion_iters: usize,
}
