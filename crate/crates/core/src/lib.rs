//! Almost-periodic functions and diffeomorphisms at finite frequency
//! truncation.
//!
//! Functions are trigonometric polynomials on a finitely generated frequency
//! lattice `{Ω·k : |k|_∞ ≤ K}`. Nonlinear operations are computed on the
//! d-torus lift and projected back; the diffeomorphism group, its Lie-group
//! and Riemannian exponential maps, and Hölder-type norm estimators are
//! built on top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod diffeo;
pub mod error;
pub mod flows;
pub mod holder;
pub mod io;
pub mod lattice;
pub mod torus;

pub use algebra::{
    apply_a_alpha, inner_product_alpha, invert_a_alpha, MetricParams, Product, TrigPoly,
    VectorField,
};
pub use diffeo::{
    compose, compose_diffeo, compose_scalar, invert_diffeo, invert_diffeo_with, jacobian,
    make_diffeo, shift_diffeo, ApDiffeo, Inversion, InversionOptions, MatrixField,
};
pub use error::{ApError, Result};
pub use flows::{
    b_alpha, blowup_time, burgers_solution, directional_derivative, energy, eulerian_velocity, exp_lie,
    exp_riemannian, integrate_eulerian_ch, integrate_geodesic, metric_nu_alpha, EulerianState,
    GeodesicState, Integrator, SolverConfig, StepRecord,
};
pub use holder::{
    cm_norm, holder_seminorm, little_holder_profile, sup_norm, EvaluableFunction, FnProbe,
    ModulusProfile, NormReport, NormTarget, OffsetSet, Verdict,
};
pub use io::{load_state, save_state, JsonState};
pub use lattice::FrequencyLattice;
pub use torus::{
    pointwise_product_dealiased, project_to_lattice, reciprocal, sample_grid, CompositionReport,
    GridData, Reciprocal, TorusGrid,
};
