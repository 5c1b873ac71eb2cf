//! Quadratic spectral kernels shared by the Lagrangian and Eulerian solvers.

use num_complex::Complex64;

use crate::algebra::{apply_a_alpha, MetricParams, TrigPoly, VectorField};
use crate::error::{ApError, Result};
use crate::torus::{min_product_grid, TorusGrid};

/// Grid samples of a vector field and of its Jacobian.
pub(crate) struct FieldSamples {
    pub values: Vec<Vec<f64>>,
    /// `grads[j * n + l] = ∂_l u_j`.
    pub grads: Vec<Vec<f64>>,
}

impl FieldSamples {
    pub fn new(grid: &TorusGrid, u: &VectorField) -> Self {
        let n = u.n();
        let lat = u.lattice();
        let mut spectra: Vec<Vec<Complex64>> = u.components().iter().map(|c| c.coeffs().to_vec()).collect();
        for e in 0..n * n {
            let c = u.component(e / n).coeffs();
            spectra.push(
                c.iter()
                    .enumerate()
                    .map(|(idx, z)| z * Complex64::new(0.0, lat.frequency(idx)[e % n]))
                    .collect(),
            );
        }
        let mut values = grid.sample_spectra(&spectra);
        let grads = values.split_off(n);
        Self { values, grads }
    }

    pub fn sup_grad(&self) -> f64 {
        self.grads
            .iter()
            .flat_map(|g| g.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_value(&self) -> f64 {
        let len = self.values[0].len();
        (0..len)
            .map(|j| self.values.iter().map(|c| c[j] * c[j]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn product_grid(u: &VectorField, m: usize) -> Result<TorusGrid> {
    let required = min_product_grid(u.lattice());
    if m < required {
        return Err(ApError::GridTooSmall { m, required });
    }
    TorusGrid::new(u.lattice(), m)
}

/// `(∇m)·u + (div u)·m + (∇u)ᵀ·m`, products dealiased on the grid.
pub(crate) fn transport_terms(grid: &TorusGrid, us: &FieldSamples, ms: &FieldSamples) -> Vec<TrigPoly> {
    let n = us.values.len();
    let len = grid.len();
    (0..n)
        .map(|j| {
            let mut acc = vec![0.0; len];
            for (p, a) in acc.iter_mut().enumerate() {
                let mut s = 0.0;
                let mut div = 0.0;
                for l in 0..n {
                    s += ms.grads[j * n + l][p] * us.values[l][p];
                    s += us.grads[l * n + j][p] * ms.values[l][p];
                    div += us.grads[l * n + l][p];
                }
                *a = s + div * ms.values[j][p];
            }
            grid.project(&acc).0
        })
        .collect()
}

/// `(∇u)·u`, dealiased.
pub(crate) fn convective_term(grid: &TorusGrid, us: &FieldSamples) -> Vec<TrigPoly> {
    let n = us.values.len();
    let len = grid.len();
    (0..n)
        .map(|j| {
            let acc: Vec<f64> = (0..len)
                .map(|p| (0..n).map(|l| us.grads[j * n + l][p] * us.values[l][p]).sum())
                .collect();
            grid.project(&acc).0
        })
        .collect()
}

/// `B_α(u) = A_α[(∇u)·u] − ∇[A_α u]·u − (div u·I + (∇u)ᵀ) A_α u`.
pub fn b_alpha(u: &VectorField, alpha: f64, m: usize) -> Result<VectorField> {
    let params = MetricParams::new(alpha)?;
    let grid = product_grid(u, m)?;
    b_alpha_on(&grid, u, params)
}

pub(crate) fn b_alpha_on(grid: &TorusGrid, u: &VectorField, params: MetricParams) -> Result<VectorField> {
    b_alpha_with_samples(grid, u, params).map(|(b, _)| b)
}

/// [`b_alpha_on`] together with the grid samples of `u` it used.
pub(crate) fn b_alpha_with_samples(
    grid: &TorusGrid,
    u: &VectorField,
    params: MetricParams,
) -> Result<(VectorField, FieldSamples)> {
    let au = apply_a_alpha(u, params);
    let us = FieldSamples::new(grid, u);
    let ms = FieldSamples::new(grid, &au);
    let conv = apply_a_alpha(&VectorField::new(convective_term(grid, &us))?, params);
    let trans = VectorField::new(transport_terms(grid, &us, &ms))?;
    Ok((conv.sub(&trans)?, us))
}
