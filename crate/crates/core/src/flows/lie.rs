//! Lie-group exponential `φ̇ = u ∘ φ` and finite-difference differentials.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::{inner_product_alpha, MetricParams, VectorField};
use crate::diffeo::{make_diffeo, ApDiffeo};
use crate::error::{ApError, Result};
use crate::torus::{compose_displacement, TorusGrid};

use super::config::SolverConfig;
use super::geodesic::combine;
use super::Integrator;

/// Time-one flow of the autonomous field `u`, integrated as
/// `ḟ = u ∘ (id + f)` from `f = 0`. The Jacobian margin is validated after
/// every step.
pub fn exp_lie(u: &VectorField, cfg: &SolverConfig) -> Result<ApDiffeo> {
    let cfg = cfg.clone().with_t_final(1.0);
    cfg.validate(u.lattice())?;
    let grid = TorusGrid::new(u.lattice(), cfg.grid)?;
    let m_check = cfg.check_grid(u.lattice());
    let rhs = |f: &VectorField| compose_displacement(&grid, u, f).map(|r| r.result);
    let mut f = VectorField::zero(u.lattice());
    let mut margin_phi = ApDiffeo::identity(u.lattice());
    let mut t = 0.0;
    for h in cfg.steps() {
        let fail = |e: ApError| ApError::StepFailure { t, cause: Box::new(e) };
        let k1 = rhs(&f).map_err(fail)?;
        f = match cfg.integrator {
            Integrator::Rk4 => {
                let k2 = rhs(&combine(&f, &[(0.5 * h, &k1)])?).map_err(fail)?;
                let k3 = rhs(&combine(&f, &[(0.5 * h, &k2)])?).map_err(fail)?;
                let k4 = rhs(&combine(&f, &[(h, &k3)])?).map_err(fail)?;
                let w = h / 6.0;
                combine(&f, &[(w, &k1), (2.0 * w, &k2), (2.0 * w, &k3), (w, &k4)])?
            }
            Integrator::Heun => {
                let k2 = rhs(&combine(&f, &[(h, &k1)])?).map_err(fail)?;
                combine(&f, &[(0.5 * h, &k1), (0.5 * h, &k2)])?
            }
        };
        margin_phi = make_diffeo(f.clone(), 0.0, m_check).map_err(fail)?;
        t += h;
    }
    Ok(margin_phi)
}

/// Central difference `(map(u + h·du) − map(u − h·du)) / 2h` of the
/// displacements.
pub fn directional_derivative<F>(map: F, u: &VectorField, du: &VectorField, h: f64) -> Result<VectorField>
where
    F: Fn(&VectorField) -> Result<ApDiffeo>,
{
    if !(h > 0.0) {
        return Err(ApError::InvalidParameter(format!("step h must be positive, got {h}")));
    }
    let plus = map(&VectorField::linear_combine(1.0, u, h, du)?)?;
    let minus = map(&VectorField::linear_combine(1.0, u, -h, du)?)?;
    VectorField::linear_combine(
        0.5 / h,
        plus.displacement(),
        -0.5 / h,
        minus.displacement(),
    )
}

/// Gram matrix `⟨eᵢ, eⱼ⟩_α`.
pub fn gram_matrix(vectors: &[VectorField], alpha: f64) -> Result<Vec<Vec<f64>>> {
    let p = MetricParams::new(alpha)?;
    let k = vectors.len();
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = inner_product_alpha(&vectors[i], &vectors[j], p)?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(a: &[Vec<f64>]) -> f64 {
    let k = a.len();
    if k == 0 {
        return f64::NAN;
    }
    let m = DMatrix::from_fn(k, k, |i, j| 0.5 * (a[i][j] + a[j][i]));
    SymmetricEigen::new(m).eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TrigPoly;
    use crate::lattice::FrequencyLattice;
    use std::sync::Arc;

    fn scalar(p: TrigPoly) -> VectorField {
        VectorField::scalar(p).unwrap()
    }

    fn sup(f: &VectorField, m: usize) -> f64 {
        let g = TorusGrid::new(f.lattice(), m).unwrap();
        g.sample(f.component(0)).iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn constant_field_flows_by_translation() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 8).unwrap());
        let cfg = SolverConfig::for_lattice(&l).with_dt(0.05);
        let c = VectorField::constant(&l, &[2.5]).unwrap();
        let e = exp_lie(&c, &cfg).unwrap();
        assert!(e.displacement().max_coeff_diff(&c).unwrap() < 1e-14);
        let z = exp_lie(&VectorField::zero(&l), &cfg).unwrap();
        assert_eq!(z.displacement().l1_mass(), 0.0);
    }

    #[test]
    fn matches_scalar_flow_pointwise() {
        // ẋ = 0.1 sin x has tan(x/2) = tan(x₀/2)·e^{0.1 t}.
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0], 24).unwrap());
        let u = scalar(TrigPoly::sin_mode(&l, &[1], 0.1).unwrap());
        let cfg = SolverConfig::for_lattice(&l).with_dt(0.01);
        let e = exp_lie(&u, &cfg).unwrap();
        for j in 0..10 {
            let x0 = -3.0 + 0.6 * j as f64 + 0.05;
            let exact = 2.0 * ((x0 / 2.0).tan() * 0.1f64.exp()).atan();
            let got = e.evaluate(&[x0])[0];
            assert!((got - exact).abs() < 1e-8, "x0 = {x0}: {got} vs {exact}");
        }
    }

    #[test]
    fn differential_at_zero_is_identity() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 8).unwrap());
        let cfg = SolverConfig::for_lattice(&l).with_dt(0.05);
        let du = scalar(TrigPoly::cos_mode(&l, &[1, -1], 1.0).unwrap());
        let zero = VectorField::zero(&l);
        let d = directional_derivative(|v| exp_lie(v, &cfg), &zero, &du, 1e-3).unwrap();
        let err = d.max_coeff_diff(&du).unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn kernel_direction_at_a_constant() {
        let tau = 2.0 * std::f64::consts::PI;
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, tau], 16).unwrap());
        let cfg = SolverConfig::for_lattice(&l).with_dt(0.01);
        let c = VectorField::constant(&l, &[1.0]).unwrap();
        let kernel = scalar(TrigPoly::cos_mode(&l, &[0, 1], 1.0).unwrap());
        let d = directional_derivative(|v| exp_lie(v, &cfg), &c, &kernel, 1e-3).unwrap();
        assert!(sup(&d, 128) < 1e-4);
        // ∫₀¹ cos(x + s) ds = 2 sin(½) cos(x + ½).
        let generic = scalar(TrigPoly::cos_mode(&l, &[1, 0], 1.0).unwrap());
        let d = directional_derivative(|v| exp_lie(v, &cfg), &c, &generic, 1e-3).unwrap();
        assert!((sup(&d, 128) - 2.0 * 0.5f64.sin()).abs() < 2e-3);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0], 4).unwrap());
        let z = VectorField::zero(&l);
        let cfg = SolverConfig::for_lattice(&l);
        assert!(directional_derivative(|v| exp_lie(v, &cfg), &z, &z, 0.0).is_err());
    }

    #[test]
    fn gram_eigenvalues() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0], 4).unwrap());
        let e = vec![
            scalar(TrigPoly::cos_mode(&l, &[1], 1.0).unwrap()),
            scalar(TrigPoly::sin_mode(&l, &[1], 1.0).unwrap()),
            scalar(TrigPoly::cos_mode(&l, &[2], 1.0).unwrap()),
        ];
        let g = gram_matrix(&e, 0.0).unwrap();
        assert!((g[0][0] - 0.5).abs() < 1e-15 && g[0][1].abs() < 1e-15);
        assert!((min_eigenvalue_sym(&g) - 0.5).abs() < 1e-14);
        let g = gram_matrix(&e, 1.0).unwrap();
        assert!((min_eigenvalue_sym(&g) - 1.0).abs() < 1e-14);
    }
}
