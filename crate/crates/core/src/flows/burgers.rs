//! Inviscid Burgers `u_t + 3u u_x = 0` by characteristics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{TrigPoly, VectorField};
use crate::diffeo::{inverse_samples, make_diffeo};
use crate::error::{ApError, Result};
use crate::torus::{compose_on_shifts, fast_len, TorusGrid};

use super::config::SolverConfig;

/// Largest fraction of the blow-up time accepted by [`burgers_solution`].
const BLOWUP_FRACTION: f64 = 0.9;

fn require_scalar(u0: &TrigPoly) -> Result<()> {
    if u0.lattice().n() != 1 {
        return Err(ApError::InvalidParameter(format!(
            "Burgers is one-dimensional, got n = {}",
            u0.lattice().n()
        )));
    }
    Ok(())
}

/// Value, gradient and Hessian of the torus lift of `p` at `θ`.
fn lift_jet(p: &TrigPoly, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let lat = p.lattice();
    let d = lat.d();
    let mut k = vec![0i64; d];
    let mut val = 0.0;
    let mut grad = DVector::zeros(d);
    let mut hess = DMatrix::zeros(d, d);
    for (idx, c) in p.coeffs().iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        lat.index_into(idx, &mut k);
        let phase: f64 = k.iter().zip(theta).map(|(a, t)| *a as f64 * t).sum();
        let e = *c * Complex64::from_polar(1.0, phase);
        val += e.re;
        for a in 0..d {
            grad[a] -= k[a] as f64 * e.im;
            for b in 0..d {
                hess[(a, b)] -= (k[a] * k[b]) as f64 * e.re;
            }
        }
    }
    (val, grad, hess)
}

/// Infimum over `x ∈ R` of a one-dimensional polynomial, as the minimum of its
/// torus lift: grid search followed by Newton refinement.
fn infimum(p: &TrigPoly) -> Result<f64> {
    let lat = p.lattice();
    let d = lat.d();
    let max_len = 1usize << 22;
    let mut m = fast_len((8 * lat.side()).max(64));
    while m.pow(d as u32) > max_len && m > lat.side() {
        m = fast_len(m / 2 + 1).min(m - 1);
    }
    let m = m.max(2 * lat.k_max() + 1);
    let grid = TorusGrid::new(lat, m)?;
    let vals = grid.sample(p);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]));
    let mut best = vals[order[0]];
    for &start in order.iter().take(8) {
        let mut theta = grid.theta(start);
        let mut cur = vals[start];
        for _ in 0..30 {
            let (_, g, h) = lift_jet(p, &theta);
            let Some(step) = h.clone().lu().solve(&(-&g)) else { break };
            let mut tau = 1.0;
            let mut improved = false;
            while tau > 1e-6 {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + tau * s).collect();
                let (v, _, _) = lift_jet(p, &cand);
                if v < cur {
                    theta = cand;
                    cur = v;
                    improved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !improved || step.norm() < 1e-14 {
                break;
            }
        }
        best = best.min(cur);
    }
    Ok(best)
}

/// Blow-up time `1/ρ₀` with `ρ₀ = −min(0, inf 3u₀')`; infinite when `u₀` is
/// nondecreasing.
pub fn blowup_time(u0: &TrigPoly) -> Result<f64> {
    require_scalar(u0)?;
    let du = u0.derivative(0)?;
    let rho = -(3.0 * infimum(&du)?).min(0.0);
    Ok(if rho > 0.0 { 1.0 / rho } else { f64::INFINITY })
}

/// `u(t) = u₀ ∘ ψ(t)⁻¹` with `ψ(t) = id + 3t·u₀`. Times beyond 90% of the
/// blow-up time are refused.
pub fn burgers_solution(u0: &TrigPoly, t: f64, cfg: &SolverConfig) -> Result<TrigPoly> {
    require_scalar(u0)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApError::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let blowup = blowup_time(u0)?;
    if t > BLOWUP_FRACTION * blowup {
        return Err(ApError::BeyondBlowup { t, blowup });
    }
    let lat = u0.lattice();
    let field = VectorField::scalar(u0.clone())?;
    let psi = make_diffeo(field.scaled(3.0 * t), 0.0, cfg.check_grid(lat))?;
    let mut opts = cfg.inversion();
    opts.max_iter = opts.max_iter.max(2000);
    let inv = inverse_samples(psi.displacement(), &opts, None)?;
    let rep = compose_on_shifts(&inv.grid, &field, &inv.values)?;
    Ok(rep.result.into_components().remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::integrate_eulerian_ch;
    use crate::lattice::FrequencyLattice;
    use std::sync::Arc;

    #[test]
    fn constant_never_breaks() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 8).unwrap());
        let c = TrigPoly::constant(&l, 0.4);
        assert_eq!(blowup_time(&c).unwrap(), f64::INFINITY);
        let cfg = SolverConfig::for_lattice(&l);
        let u = burgers_solution(&c, 5.0, &cfg).unwrap();
        assert!(u.max_coeff_diff(&c).unwrap() < 1e-15);
    }

    #[test]
    fn sine_breaks_at_one_third() {
        for omegas in [vec![1.0], vec![1.0, 2f64.sqrt()]] {
            let l = Arc::new(FrequencyLattice::one_dim(&omegas, 8).unwrap());
            let mut k = vec![0; omegas.len()];
            k[0] = 1;
            let u0 = TrigPoly::sin_mode(&l, &k, 1.0).unwrap();
            let t = blowup_time(&u0).unwrap();
            assert!((t - 1.0 / 3.0).abs() < 1e-12, "{t}");
            let cfg = SolverConfig::for_lattice(&l);
            match burgers_solution(&u0, 0.4, &cfg) {
                Err(ApError::BeyondBlowup { blowup, .. }) => assert!((blowup - 1.0 / 3.0).abs() < 1e-12),
                other => panic!("expected BeyondBlowup, got {other:?}"),
            }
        }
    }

    #[test]
    fn quasi_periodic_blowup_uses_the_torus_infimum() {
        // inf of −0.2(sin x + √2 sin √2x) over R is −0.2(1 + √2), approached
        // but not attained.
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 8).unwrap());
        let u0 = TrigPoly::cos_mode(&l, &[1, 0], 0.2)
            .unwrap()
            .add(&TrigPoly::cos_mode(&l, &[0, 1], 0.2).unwrap())
            .unwrap();
        let expected = 1.0 / (3.0 * 0.2 * (1.0 + 2f64.sqrt()));
        assert!((blowup_time(&u0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn characteristics_match_the_eulerian_solver() {
        let l = Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 16).unwrap());
        let u0 = TrigPoly::cos_mode(&l, &[1, 0], 0.2)
            .unwrap()
            .add(&TrigPoly::cos_mode(&l, &[0, 1], 0.2).unwrap())
            .unwrap();
        let cfg = SolverConfig::for_lattice(&l)
            .with_grid(64)
            .with_alpha(0.0)
            .with_dt(2e-3)
            .with_t_final(0.5);
        let chars = burgers_solution(&u0, 0.5, &cfg).unwrap();
        let eul = integrate_eulerian_ch(&VectorField::scalar(u0).unwrap(), &cfg).unwrap();
        let grid = TorusGrid::new(&l, 128).unwrap();
        let diff = chars.sub(eul.final_state.u.component(0)).unwrap();
        let err = grid.sample(&diff).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn rejects_vector_input() {
        let l = Arc::new(FrequencyLattice::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 4).unwrap());
        let p = TrigPoly::constant(&l, 1.0);
        assert!(matches!(blowup_time(&p), Err(ApError::InvalidParameter(_))));
    }
}
