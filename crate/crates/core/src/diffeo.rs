//! The group of almost-periodic diffeomorphisms `φ = id + f` at finite
//! truncation.

use std::sync::Arc;

use crate::algebra::{TrigPoly, VectorField};
use crate::error::{ApError, Result};
use crate::lattice::FrequencyLattice;
use crate::torus::{
    bounding, compose_displacement, default_grid, sample_field, CompositionReport,
    ShiftEvaluator, TorusGrid,
};

/// Subtracted from the grid minimum of the Jacobian determinant to account
/// for off-grid minima.
pub const MARGIN_SAFETY: f64 = 1e-9;

/// Default validation grid, `4(2K+1)` points per torus axis.
pub fn default_check_grid(lattice: &FrequencyLattice) -> usize {
    4 * lattice.side()
}

/// `φ = id + f` with a validated lower bound on `det(I + df)`.
#[derive(Debug, Clone)]
pub struct ApDiffeo {
    displacement: VectorField,
    margin: f64,
    m_check: usize,
}

/// Jacobian entries `∂f_j/∂x_l`, row-major.
#[derive(Debug, Clone)]
pub struct MatrixField {
    n: usize,
    entries: Vec<TrigPoly>,
}

impl MatrixField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, l: usize) -> &TrigPoly {
        &self.entries[j * self.n + l]
    }
}

/// Determinant of a small row-major matrix by Gaussian elimination with
/// partial pivoting.
pub(crate) fn det(a: &mut [f64], n: usize) -> f64 {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => {
            let mut d = 1.0;
            for c in 0..n {
                let p = (c..n)
                    .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
                    .unwrap();
                if a[p * n + c] == 0.0 {
                    return 0.0;
                }
                if p != c {
                    for k in 0..n {
                        a.swap(p * n + k, c * n + k);
                    }
                    d = -d;
                }
                let piv = a[c * n + c];
                d *= piv;
                for r in c + 1..n {
                    let f = a[r * n + c] / piv;
                    for k in c..n {
                        a[r * n + k] -= f * a[c * n + k];
                    }
                }
            }
            d
        }
    }
}

/// Grid values of `det(I + df)`.
pub(crate) fn jacobian_det_on_grid(grid: &TorusGrid, f: &VectorField) -> Vec<f64> {
    let n = f.n();
    let partials: Vec<Vec<f64>> = (0..n * n)
        .map(|e| grid.sample_derivative(f.component(e / n), e % n))
        .collect();
    let mut a = vec![0.0; n * n];
    (0..grid.len())
        .map(|j| {
            for e in 0..n * n {
                a[e] = partials[e][j] + if e / n == e % n { 1.0 } else { 0.0 };
            }
            det(&mut a, n)
        })
        .collect()
}

/// Validates `det(I + df) > eps_min` on an `m_check^d` grid.
pub fn make_diffeo(f: VectorField, eps_min: f64, m_check: usize) -> Result<ApDiffeo> {
    let grid = TorusGrid::new(f.lattice(), m_check)?;
    let grid_min = jacobian_det_on_grid(&grid, &f)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let margin = grid_min - MARGIN_SAFETY;
    if !(grid_min > eps_min) || !(margin > 0.0) {
        return Err(ApError::MarginViolated { grid_min });
    }
    Ok(ApDiffeo {
        displacement: f,
        margin,
        m_check,
    })
}

impl ApDiffeo {
    pub fn identity(lattice: &Arc<FrequencyLattice>) -> Self {
        Self {
            displacement: VectorField::zero(lattice),
            margin: 1.0 - MARGIN_SAFETY,
            m_check: default_check_grid(lattice),
        }
    }

    /// Validates with `eps_min = 0` on the default check grid.
    pub fn new(f: VectorField) -> Result<Self> {
        let m = default_check_grid(f.lattice());
        make_diffeo(f, 0.0, m)
    }

    pub fn displacement(&self) -> &VectorField {
        &self.displacement
    }

    pub fn into_displacement(self) -> VectorField {
        self.displacement
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn m_check(&self) -> usize {
        self.m_check
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        self.displacement.lattice()
    }

    pub fn n(&self) -> usize {
        self.displacement.n()
    }

    /// `φ(x) = x + f(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.displacement
            .evaluate(x)
            .iter()
            .zip(x)
            .map(|(f, xi)| xi + f)
            .collect()
    }

    /// Rebuilds from stored parts after checking the stored margin against a
    /// fresh grid validation; stale margins that overstate the recomputed
    /// one by more than `1e-6` are refused.
    pub fn from_parts(f: VectorField, margin: f64, m_check: usize) -> Result<Self> {
        let fresh = make_diffeo(f, 0.0, m_check).map_err(|e| match e {
            ApError::MarginViolated { grid_min } => ApError::Invariant(format!(
                "stored diffeomorphism fails validation (grid minimum {grid_min:e})"
            )),
            other => other,
        })?;
        if margin > fresh.margin + 1e-6 {
            return Err(ApError::Invariant(format!(
                "stale margin {margin} exceeds the validated margin {}",
                fresh.margin
            )));
        }
        Ok(Self {
            margin: margin.min(fresh.margin),
            ..fresh
        })
    }
}

pub fn jacobian(phi: &ApDiffeo) -> MatrixField {
    let f = phi.displacement();
    let n = f.n();
    let entries = (0..n * n)
        .map(|e| f.component(e / n).derivative(e % n).expect("axis within range"))
        .collect();
    MatrixField { n, entries }
}

/// `g ∘ φ` for a vector field `g` (component-wise).
pub fn compose(g: &VectorField, phi: &ApDiffeo, m: usize) -> Result<CompositionReport<VectorField>> {
    let grid = TorusGrid::new(g.lattice(), m)?;
    compose_displacement(&grid, g, phi.displacement())
}

/// `g ∘ φ` for a scalar polynomial `g`.
pub fn compose_scalar(g: &TrigPoly, phi: &ApDiffeo, m: usize) -> Result<CompositionReport<TrigPoly>> {
    if !g.lattice().is_compatible(phi.lattice()) {
        return Err(ApError::LatticeMismatch);
    }
    let grid = TorusGrid::new(g.lattice(), m)?;
    let shifts = sample_field(&grid, phi.displacement());
    let ev = ShiftEvaluator::covering(&grid, g, &shifts);
    let (result, aliased_mass) = grid.project(&ev.eval(&grid, &shifts));
    Ok(CompositionReport {
        result,
        aliased_mass,
    })
}

/// `(φ∘ψ)(x) = x + g(x) + f(x + g(x))` for `φ = id + f`, `ψ = id + g`.
pub fn compose_diffeo(phi: &ApDiffeo, psi: &ApDiffeo) -> Result<ApDiffeo> {
    compose_diffeo_on(phi, psi, default_grid(phi.lattice()))
}

pub fn compose_diffeo_on(phi: &ApDiffeo, psi: &ApDiffeo, m: usize) -> Result<ApDiffeo> {
    if !phi.displacement.is_compatible(&psi.displacement) {
        return Err(ApError::LatticeMismatch);
    }
    let grid = TorusGrid::new(phi.lattice(), m)?;
    let fpsi = compose_displacement(&grid, &phi.displacement, &psi.displacement)?.result;
    let disp = psi.displacement.add(&fpsi)?;
    make_diffeo(disp, 0.0, phi.m_check)
}

/// `φ_c(x) = x + f(x + c)`; the Jacobian field is translated, so the margin
/// carries over unchanged.
pub fn shift_diffeo(phi: &ApDiffeo, c: &[f64]) -> ApDiffeo {
    ApDiffeo {
        displacement: phi.displacement.shift(c),
        margin: phi.margin,
        m_check: phi.m_check,
    }
}

#[derive(Debug, Clone)]
pub struct InversionOptions {
    /// Bound on both grid residuals `|φ(ψ(x)) − x|` and `|ψ(φ(x)) − x|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Torus grid per axis; defaults to the oversampled composition grid.
    pub grid: Option<usize>,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            grid: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub inverse: ApDiffeo,
    pub iterations: usize,
    /// Larger of the two composition residuals after truncation.
    pub residual: f64,
    /// Converged displacement samples, reusable as a warm start.
    pub grid_values: Vec<Vec<f64>>,
}

pub fn invert_diffeo(phi: &ApDiffeo, tol: f64, max_iter: usize) -> Result<ApDiffeo> {
    let opts = InversionOptions {
        tol,
        max_iter,
        grid: None,
    };
    invert_diffeo_with(phi, &opts, None).map(|inv| inv.inverse)
}

const DAMPING_FLOOR: f64 = 0.25;

/// Grid samples of the inverse displacement before projection.
pub(crate) struct InverseSamples {
    pub grid: TorusGrid,
    pub values: Vec<Vec<f64>>,
    pub iterations: usize,
    evals: Vec<ShiftEvaluator>,
    f_grid: Vec<Vec<f64>>,
}

/// Solves `g = −f ∘ (id + g)` on the torus grid by damped fixed-point
/// iteration `G ← G + λ(−F(η + ΩᵀG) − G)`.
pub(crate) fn inverse_samples(
    f: &VectorField,
    opts: &InversionOptions,
    warm_start: Option<&[Vec<f64>]>,
) -> Result<InverseSamples> {
    if !(opts.tol > 0.0) {
        return Err(ApError::InvalidParameter("inversion tolerance must be positive".into()));
    }
    let lat = f.lattice();
    let n = f.n();
    let grid = TorusGrid::new(lat, opts.grid.unwrap_or_else(|| default_grid(lat)))?;
    let f_grid = sample_field(&grid, f);
    let neg_f: Vec<Vec<f64>> = f_grid.iter().map(|c| c.iter().map(|v| -v).collect()).collect();

    // The iterates take values in the range of −F; pad the sampled range.
    let (center, half) = bounding(&neg_f);
    let pad = |r: &f64, c: &f64| 1.1 * r + 1e-12 * (1.0 + c.abs());
    let radius: Vec<f64> = half.iter().zip(&center).map(|(r, c)| pad(r, c)).collect();
    let build = |center: &[f64], radius: &[f64]| -> Vec<ShiftEvaluator> {
        f.components()
            .iter()
            .map(|c| ShiftEvaluator::new(&grid, c, center, radius))
            .collect()
    };
    let mut evals = build(&center, &radius);

    let mut g: Vec<Vec<f64>> = match warm_start {
        Some(w) if w.len() == n && w.iter().all(|c| c.len() == grid.len()) => w.to_vec(),
        _ => neg_f.clone(),
    };
    let apply = |evals: &mut Vec<ShiftEvaluator>, g: &[Vec<f64>]| -> Vec<Vec<f64>> {
        if !evals[0].covers(g) {
            let (c, h) = bounding(g);
            let r: Vec<f64> = h.iter().zip(&c).map(|(r, c)| pad(r, c)).collect();
            *evals = build(&c, &r);
        }
        evals
            .iter()
            .map(|ev| ev.eval(&grid, g).into_iter().map(|v| -v).collect())
            .collect()
    };

    let inner_tol = 1e-3 * opts.tol;
    let mut lambda: f64 = 1.0;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let t = apply(&mut evals, &g);
        residual = sup_diff(&t, &g);
        if !residual.is_finite() {
            break;
        }
        if residual <= inner_tol || (residual <= 0.1 * opts.tol && residual >= 0.5 * prev) {
            g = t;
            converged = true;
            break;
        }
        if residual > prev {
            lambda = (lambda * 0.5).max(DAMPING_FLOOR);
        }
        prev = residual;
        for (gc, tc) in g.iter_mut().zip(&t) {
            for (a, b) in gc.iter_mut().zip(tc) {
                *a += lambda * (b - *a);
            }
        }
    }
    if !converged {
        return Err(ApError::NoConvergence {
            iterations,
            residual,
        });
    }

    Ok(InverseSamples {
        grid,
        values: g,
        iterations,
        evals,
        f_grid,
    })
}

/// Inverts `φ`, projects the inverse onto the lattice and checks both
/// composition residuals against `opts.tol`.
pub fn invert_diffeo_with(
    phi: &ApDiffeo,
    opts: &InversionOptions,
    warm_start: Option<&[Vec<f64>]>,
) -> Result<Inversion> {
    let InverseSamples {
        grid,
        values: g,
        iterations,
        mut evals,
        f_grid,
    } = inverse_samples(phi.displacement(), opts, warm_start)?;
    let comps: Vec<TrigPoly> = g.iter().map(|c| grid.project(c).0).collect();
    let disp = VectorField::new(comps)?;

    // φ(ψ(x)) − x = G(η) + F(η + ΩᵀG(η)) with the projected G.
    let g_proj = sample_field(&grid, &disp);
    let f_at: Vec<Vec<f64>> = {
        if !evals[0].covers(&g_proj) {
            evals = phi
                .displacement()
                .components()
                .iter()
                .map(|c| ShiftEvaluator::covering(&grid, c, &g_proj))
                .collect();
        }
        evals
            .iter()
            .map(|ev| ev.eval(&grid, &g_proj).into_iter().map(|v| -v).collect())
            .collect()
    };
    let r1 = sup_diff(&g_proj, &f_at);
    // ψ(φ(x)) − x = F(η) + G(η + ΩᵀF(η)).
    let r2 = disp
        .components()
        .iter()
        .zip(&f_grid)
        .map(|(gc, fc)| {
            let ev = ShiftEvaluator::covering(&grid, gc, &f_grid);
            ev.eval(&grid, &f_grid)
                .iter()
                .zip(fc)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let residual = r1.max(r2);
    if !(residual <= opts.tol) {
        return Err(ApError::NoConvergence {
            iterations,
            residual,
        });
    }
    let inverse = make_diffeo(disp, 0.0, phi.m_check)?;
    Ok(Inversion {
        inverse,
        iterations,
        residual,
        grid_values: g,
    })
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(omegas: &[f64], k: usize) -> Arc<FrequencyLattice> {
        Arc::new(FrequencyLattice::one_dim(omegas, k).unwrap())
    }

    fn field(p: TrigPoly) -> VectorField {
        VectorField::scalar(p).unwrap()
    }

    #[test]
    fn identity_margin() {
        let l = lat(&[1.0], 8);
        let phi = make_diffeo(VectorField::zero(&l), 0.5, 68).unwrap();
        assert!((phi.margin() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn margin_of_half_sine() {
        let l = lat(&[1.0], 8);
        let f = field(TrigPoly::sin_mode(&l, &[1], 0.5).unwrap());
        let phi = make_diffeo(f, 0.1, 68).unwrap();
        // det = 1 + 0.5 cos x; the grid contains x = π.
        assert!((phi.margin() - 0.5).abs() < 1e-8);
        let f = field(TrigPoly::sin_mode(&l, &[1], 1.1).unwrap());
        match make_diffeo(f, 0.0, 68) {
            Err(ApError::MarginViolated { grid_min }) => assert!((grid_min + 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobian_entries() {
        let l = lat(&[1.0], 4);
        assert!(jacobian(&ApDiffeo::identity(&l)).entry(0, 0).is_zero());
        let phi = ApDiffeo::new(field(TrigPoly::sin_mode(&l, &[1], 0.5).unwrap())).unwrap();
        let expected = TrigPoly::cos_mode(&l, &[1], 0.5).unwrap();
        assert!(jacobian(&phi).entry(0, 0).max_coeff_diff(&expected).unwrap() < 1e-16);

        let l2 = Arc::new(FrequencyLattice::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap());
        let f = VectorField::new(vec![
            TrigPoly::sin_mode(&l2, &[0, 1], 0.5).unwrap(),
            TrigPoly::zero(&l2),
        ])
        .unwrap();
        let j = jacobian(&ApDiffeo::new(f).unwrap());
        assert!(j.entry(0, 0).is_zero() && j.entry(1, 0).is_zero() && j.entry(1, 1).is_zero());
        let expected = TrigPoly::cos_mode(&l2, &[0, 1], 0.5).unwrap();
        assert!(j.entry(0, 1).max_coeff_diff(&expected).unwrap() < 1e-16);
    }

    #[test]
    fn translations_compose_and_invert_exactly() {
        let l = lat(&[1.0, 2f64.sqrt()], 6);
        let a = ApDiffeo::new(VectorField::constant(&l, &[0.7]).unwrap()).unwrap();
        let b = ApDiffeo::new(VectorField::constant(&l, &[-0.2]).unwrap()).unwrap();
        let ab = compose_diffeo(&a, &b).unwrap();
        assert!((ab.displacement().component(0).bohr_mean() - 0.5).abs() < 1e-15);
        assert!(ab.displacement().l1_mass() - 0.5 < 1e-15);
        let inv = invert_diffeo(&a, 1e-12, 10).unwrap();
        assert!((inv.displacement().component(0).bohr_mean() + 0.7).abs() < 1e-15);
        let id = ApDiffeo::identity(&l);
        let same = compose_diffeo(&a, &id).unwrap();
        assert!(same.displacement().max_coeff_diff(a.displacement()).unwrap() < 1e-15);
    }

    #[test]
    fn composition_matches_pointwise_evaluation() {
        let l = lat(&[1.0, 2f64.sqrt()], 16);
        let phi = ApDiffeo::new(field(TrigPoly::sin_mode(&l, &[1, 0], 0.2).unwrap())).unwrap();
        let psi = ApDiffeo::new(field(TrigPoly::cos_mode(&l, &[0, 1], 0.2).unwrap())).unwrap();
        let comp = compose_diffeo(&phi, &psi).unwrap();
        for i in 0..10 {
            let x = -17.3 + 4.1 * i as f64;
            let y = psi.evaluate(&[x])[0];
            let expected = y + 0.2 * y.sin();
            assert!((comp.evaluate(&[x])[0] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn composition_with_translation_is_a_phase() {
        let l = lat(&[1.0], 8);
        let g = field(TrigPoly::cos_mode(&l, &[1], 1.0).unwrap());
        let c = 0.37;
        let phi = ApDiffeo::new(VectorField::constant(&l, &[c]).unwrap()).unwrap();
        let rep = compose(&g, &phi, 36).unwrap();
        assert!(rep.result.max_coeff_diff(&g.shift(&[c])).unwrap() < 1e-10);
        let id = ApDiffeo::identity(&l);
        assert!(compose(&g, &id, 36).unwrap().result.max_coeff_diff(&g).unwrap() < 1e-15);
    }

    #[test]
    fn inverse_of_kepler_type_map() {
        let l = lat(&[1.0], 32);
        let phi = ApDiffeo::new(field(TrigPoly::sin_mode(&l, &[1], 0.3).unwrap())).unwrap();
        let inv = invert_diffeo_with(&phi, &InversionOptions { tol: 1e-10, max_iter: 60, grid: None }, None)
            .unwrap();
        assert!(inv.iterations <= 60);
        assert!(inv.residual < 1e-10);
        // Scalar root finding for x + 0.3 sin x = y, by bisection.
        for i in 0..7 {
            let y = -3.0 + i as f64;
            let (mut lo, mut hi) = (y - 1.0, y + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid + 0.3 * mid.sin() < y {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((inv.inverse.evaluate(&[y])[0] - 0.5 * (lo + hi)).abs() < 1e-10);
        }
    }

    #[test]
    fn inversion_near_margin_boundary_never_silently_wrong() {
        let l = lat(&[1.0], 16);
        let phi = ApDiffeo::new(field(TrigPoly::sin_mode(&l, &[1], 0.99).unwrap())).unwrap();
        match invert_diffeo(&phi, 1e-12, 40) {
            Err(ApError::NoConvergence { .. }) | Err(ApError::MarginViolated { .. }) => {}
            Ok(psi) => {
                for i in 0..50 {
                    let x = -PI + 0.13 * i as f64;
                    let back = phi.evaluate(&psi.evaluate(&[x]))[0];
                    assert!((back - x).abs() < 1e-10);
                }
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn shift_preserves_margin() {
        let l = lat(&[1.0, 2f64.sqrt()], 8);
        let phi = ApDiffeo::new(field(TrigPoly::sin_mode(&l, &[1, 1], 0.2).unwrap())).unwrap();
        assert!(shift_diffeo(&phi, &[0.0]).displacement().max_coeff_diff(phi.displacement()).unwrap() == 0.0);
        let s = shift_diffeo(&phi, &[1.3]);
        assert!((s.margin() - phi.margin()).abs() < 1e-12);
    }

    #[test]
    fn stale_margin_is_refused() {
        let l = lat(&[1.0], 8);
        let f = field(TrigPoly::sin_mode(&l, &[1], 0.5).unwrap());
        assert!(ApDiffeo::from_parts(f.clone(), 0.5 - 1e-9, 36).is_ok());
        assert!(matches!(
            ApDiffeo::from_parts(f, 0.9, 36),
            Err(ApError::Invariant(_))
        ));
    }

    #[test]
    fn small_determinants() {
        let mut a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        assert!((det(&mut a, 3) - 18.0).abs() < 1e-12);
    }
}
