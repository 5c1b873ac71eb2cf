//! Torus lift of quasi-periodic functions.
//!
//! A polynomial `f(x) = Σ c_k e^{iΛ(k)·x}` is the restriction of the periodic
//! function `F(θ) = Σ c_k e^{ik·θ}` on the d-torus to the line `θ = Ωᵀx`.
//! Pointwise nonlinearities are evaluated on an `M^d` grid over the torus and
//! projected back with an FFT. Composition with `x ↦ x + f(x)` becomes the
//! skew shift `θ ↦ θ + Ωᵀ F(θ)`.

use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::algebra::{TrigPoly, VectorField};
use crate::error::{ApError, Result};
use crate::lattice::FrequencyLattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest length `≥ min` of the form `2^a 3^b 5^c`.
pub fn fast_len(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Default composition grid: oversampling factor 2, rounded up to a fast
/// FFT length.
pub fn default_grid(lattice: &FrequencyLattice) -> usize {
    fast_len(2 * lattice.side())
}

/// Smallest grid on which a product of two band-`K` polynomials is exact
/// after truncation.
pub fn min_product_grid(lattice: &FrequencyLattice) -> usize {
    3 * lattice.k_max() + 1
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Forward and inverse plans of length `m`, shared across grids.
fn plans(m: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        })
        .clone()
}

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Writes the transpose of the row-major `rows × cols` matrix `src` into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        let r1 = (r0 + TILE).min(rows);
        for c0 in (0..cols).step_by(TILE) {
            let c1 = (c0 + TILE).min(cols);
            for r in r0..r1 {
                let row = &src[r * cols + c0..r * cols + c1];
                for (c, v) in (c0..c1).zip(row) {
                    dst[c * rows + r] = *v;
                }
            }
        }
    }
}

/// FFT machinery for an `M^d` grid over the torus of a lattice.
#[derive(Clone)]
pub struct TorusGrid {
    lattice: Arc<FrequencyLattice>,
    m: usize,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Grid spectrum bin of each lattice index.
    bins: Vec<usize>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid")
            .field("m", &self.m)
            .field("d", &self.lattice.d())
            .finish()
    }
}

impl TorusGrid {
    pub fn new(lattice: &Arc<FrequencyLattice>, m: usize) -> Result<Self> {
        let required = lattice.side();
        if m < required {
            return Err(ApError::GridTooSmall { m, required });
        }
        let d = lattice.d();
        let len = m
            .checked_pow(d as u32)
            .filter(|&l| l <= 1 << 26)
            .ok_or_else(|| ApError::InvalidParameter(format!("grid {m}^{d} is too large")))?;
        let (fwd, inv) = plans(m);
        let mut k = vec![0i64; d];
        let bins = (0..lattice.len())
            .map(|idx| {
                lattice.index_into(idx, &mut k);
                k.iter()
                    .fold(0usize, |acc, &kj| acc * m + kj.rem_euclid(m as i64) as usize)
            })
            .collect();
        Ok(Self {
            lattice: Arc::clone(lattice),
            m,
            len,
            fwd,
            inv,
            bins,
        })
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    /// Points per torus axis.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of grid points, `M^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Torus coordinates of grid point `j`.
    pub fn theta(&self, mut j: usize) -> Vec<f64> {
        let d = self.lattice.d();
        let mut th = vec![0.0; d];
        for a in (0..d).rev() {
            th[a] = 2.0 * PI * (j % self.m) as f64 / self.m as f64;
            j /= self.m;
        }
        th
    }

    /// In-place d-dimensional transform, one axis at a time. With `band`
    /// set, the input is taken to vanish outside `|k|_∞ ≤ K`; lines that
    /// are still identically zero before their pass are skipped.
    fn fft_nd(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>, band: Option<usize>) {
        let m = self.m;
        let d = self.lattice.d();
        let in_band = |i: usize| band.is_none_or(|k| i <= k || i + k >= m);
        // Multi-index of chunk `c` over the leading `a` axes, all in band.
        let keep = |mut c: usize, a: usize| (0..a).all(|_| {
            let ok = in_band(c % m);
            c /= m;
            ok
        });
        SCRATCH.with(|cell| {
            let (scratch, lines) = &mut *cell.borrow_mut();
            let need = plan.get_inplace_scratch_len();
            if scratch.len() < need {
                scratch.resize(need, ZERO);
            }
            // The last axis is contiguous.
            for (c, row) in data.chunks_exact_mut(m).enumerate() {
                if keep(c, d - 1) {
                    plan.process_with_scratch(row, &mut scratch[..need]);
                }
            }
            for axis in (0..d.saturating_sub(1)).rev() {
                let stride = m.pow((d - 1 - axis) as u32);
                let block = stride * m;
                if lines.len() < block {
                    lines.resize(block, ZERO);
                }
                let lines = &mut lines[..block];
                for (c, chunk) in data.chunks_exact_mut(block).enumerate() {
                    if !keep(c, axis) {
                        continue;
                    }
                    transpose(chunk, lines, m, stride);
                    plan.process_with_scratch(lines, &mut scratch[..need]);
                    transpose(lines, chunk, stride, m);
                }
            }
        });
    }

    /// Grid values of `Σ_k mult(k)·c_k e^{ik·θ}`.
    pub fn sample_with(&self, f: &TrigPoly, mut mult: impl FnMut(usize) -> Complex64) -> Vec<f64> {
        let spec: Vec<Complex64> = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, c)| if c.re != 0.0 || c.im != 0.0 { c * mult(idx) } else { ZERO })
            .collect();
        self.sample_spectra(&[spec]).remove(0)
    }

    pub fn sample(&self, f: &TrigPoly) -> Vec<f64> {
        self.sample_spectra(&[f.coeffs().to_vec()]).remove(0)
    }

    /// Grid values for several Hermitian coefficient vectors. Two real
    /// results share one complex transform, `a + i·b`.
    pub(crate) fn sample_spectra(&self, spectra: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        let mut buf = vec![ZERO; self.len];
        for pair in spectra.chunks(2) {
            buf.iter_mut().for_each(|z| *z = ZERO);
            for (b, c) in self.bins.iter().zip(&pair[0]) {
                buf[*b] = *c;
            }
            if let Some(second) = pair.get(1) {
                for (b, c) in self.bins.iter().zip(second) {
                    buf[*b] += Complex64::new(-c.im, c.re);
                }
            }
            self.fft_nd(&mut buf, &self.inv, Some(self.lattice.k_max()));
            out.push(buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }

    /// Grid values of `∂f/∂x_l`.
    pub fn sample_derivative(&self, f: &TrigPoly, l: usize) -> Vec<f64> {
        let lat = Arc::clone(&self.lattice);
        self.sample_with(f, |idx| Complex64::new(0.0, lat.frequency(idx)[l]))
    }

    /// Forward FFT, truncation to `|k|_∞ ≤ K` and Hermitian symmetrization.
    /// The aliased mass is the l1 coefficient mass of every discarded grid
    /// mode.
    pub fn project(&self, values: &[f64]) -> (TrigPoly, f64) {
        assert_eq!(values.len(), self.len, "grid size mismatch");
        let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_nd(&mut spec, &self.fwd, None);
        let scale = 1.0 / self.len as f64;
        let total: f64 = spec.iter().map(|z| z.norm_sqr().sqrt()).sum::<f64>() * scale;
        let coeffs: Vec<Complex64> = self.bins.iter().map(|&b| spec[b] * scale).collect();
        let kept: f64 = coeffs.iter().map(|z| z.norm_sqr().sqrt()).sum();
        let poly = TrigPoly::from_coeffs(&self.lattice, coeffs).expect("length matches lattice");
        (poly, (total - kept).max(0.0))
    }
}

/// Samples of one scalar polynomial on the torus grid.
#[derive(Debug, Clone)]
pub struct GridData {
    pub lattice: Arc<FrequencyLattice>,
    pub m: usize,
    pub values: Vec<f64>,
}

/// A composition result and the aliasing diagnostic of its projection.
#[derive(Debug, Clone)]
pub struct CompositionReport<T> {
    pub result: T,
    pub aliased_mass: f64,
}

pub fn sample_grid(f: &TrigPoly, m: usize) -> Result<GridData> {
    let grid = TorusGrid::new(f.lattice(), m)?;
    Ok(GridData {
        lattice: Arc::clone(f.lattice()),
        m,
        values: grid.sample(f),
    })
}

pub fn project_to_lattice(g: &GridData) -> Result<TrigPoly> {
    let grid = TorusGrid::new(&g.lattice, g.m)?;
    if g.values.len() != grid.len() {
        return Err(ApError::InvalidParameter(format!(
            "grid data has {} values, expected {}",
            g.values.len(),
            grid.len()
        )));
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(ApError::InvalidParameter("grid data has nonfinite values".into()));
    }
    Ok(grid.project(&g.values).0)
}

/// Pointwise product evaluated on the grid. Requires `M ≥ 3K+1`, which makes
/// the result coincide with the truncated convolution product.
pub fn pointwise_product_dealiased(f: &TrigPoly, g: &TrigPoly, m: usize) -> Result<TrigPoly> {
    if !f.lattice().is_compatible(g.lattice()) {
        return Err(ApError::LatticeMismatch);
    }
    let required = min_product_grid(f.lattice());
    if m < required {
        return Err(ApError::GridTooSmall { m, required });
    }
    let grid = TorusGrid::new(f.lattice(), m)?;
    let a = grid.sample(f);
    let b = grid.sample(g);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(grid.project(&prod).0)
}

/// `1/f` with its self-consistency residual `sup_grid |f·(1/f) − 1|`.
#[derive(Debug, Clone)]
pub struct Reciprocal {
    pub poly: TrigPoly,
    pub residual: f64,
}

pub fn reciprocal(f: &TrigPoly, eps: f64, m: usize) -> Result<Reciprocal> {
    if !(eps > 0.0) {
        return Err(ApError::InvalidParameter("eps must be positive".into()));
    }
    let grid = TorusGrid::new(f.lattice(), m)?;
    let vals = grid.sample(f);
    let grid_min = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if grid_min <= eps {
        return Err(ApError::LowerBoundViolated { grid_min, eps });
    }
    let inv: Vec<f64> = vals.iter().map(|v| 1.0 / v).collect();
    let (poly, _) = grid.project(&inv);
    // The residual is measured on a finer grid so that it also sees
    // off-grid behavior of the projected reciprocal.
    let check = TorusGrid::new(f.lattice(), fast_len(2 * m))?;
    let fv = check.sample(f);
    let rv = check.sample(&poly);
    let residual = fv
        .iter()
        .zip(&rv)
        .map(|(a, b)| (a * b - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Reciprocal { poly, residual })
}

/// Largest admissible Taylor order before falling back to direct summation.
const MAX_TAYLOR_ORDER: usize = 60;
/// Bound on `Σ|c_k| e^{x_k} / Σ|c_k|`, the worst-case growth of rounding
/// errors in the Taylor route.
const MAX_TAYLOR_GROWTH: f64 = 64.0;

/// Evaluates `G(θ_j + Ωᵀ s_j)` on the grid points `θ_j` for displacement
/// samples `s_j ∈ R^n`.
///
/// The constant part of the displacement is applied exactly as a phase; the
/// remainder `δ = s − center` is handled by the Taylor expansion
/// `Σ_β δ^β/β! ∂^β g`, truncated at an order whose remainder is certified by
/// `Σ_k |ĝ_k| R_P(Σ_l r_l|Λ_l(k)|)` with `R_P` the exponential series tail.
/// When that expansion is too long or badly conditioned, the evaluator sums
/// every lattice mode at every point instead.
pub(crate) struct ShiftEvaluator {
    n: usize,
    center: Vec<f64>,
    radius: Vec<f64>,
    kind: EvalKind,
}

enum EvalKind {
    Taylor {
        /// Multi-indices `β` with `|β| < P` and grid values of `∂^β g_c`.
        terms: Vec<(Vec<usize>, Vec<f64>)>,
        order: usize,
    },
    Direct {
        coeffs: Vec<Complex64>,
    },
}

/// `out[p] = Σ_{q ≥ p} x^q / q!`, summed from the far end of the series.
fn exp_tails(x: f64, terms: &mut Vec<f64>, out: &mut [f64]) {
    terms.clear();
    terms.push(1.0);
    let mut t = 1.0;
    for q in 1..out.len() + 80 {
        t *= x / q as f64;
        // Past the requested range, stop once the terms cannot matter.
        if q >= out.len() && t < 1e-40 {
            break;
        }
        terms.push(t);
    }
    let mut acc = 0.0;
    for q in (0..terms.len()).rev() {
        acc += terms[q];
        if q < out.len() {
            out[q] = acc;
        }
    }
}

fn multi_indices(n: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for degree in 0..max_degree {
        let mut current = vec![0usize; n];
        fill_degree(&mut current, 0, degree, &mut out);
    }
    out
}

fn fill_degree(cur: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v;
        fill_degree(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}

impl ShiftEvaluator {
    /// Prepares evaluation of `g` for displacements with
    /// `|s_l − center_l| ≤ radius_l`.
    pub(crate) fn new(grid: &TorusGrid, g: &TrigPoly, center: &[f64], radius: &[f64]) -> Self {
        let lat = grid.lattice();
        let n = lat.n();
        let l1 = g.l1_mass();
        let kind = Self::choose_order(g, radius, l1)
            .map(|order| {
                let gc = g.shift(center);
                let betas = multi_indices(n, order);
                // ∂^β spectra, each obtained from an earlier one of lower degree.
                let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(betas.len());
                for (t, beta) in betas.iter().enumerate() {
                    let Some(l) = beta.iter().position(|&b| b > 0) else {
                        spectra.push(gc.coeffs().to_vec());
                        continue;
                    };
                    let mut prev = beta.clone();
                    prev[l] -= 1;
                    let src = betas[..t].iter().position(|b| *b == prev).expect("lower degree first");
                    let next: Vec<Complex64> = spectra[src]
                        .iter()
                        .enumerate()
                        .map(|(idx, c)| c * Complex64::new(0.0, lat.frequency(idx)[l]))
                        .collect();
                    spectra.push(next);
                }
                let values = grid.sample_spectra(&spectra);
                let terms = betas.into_iter().zip(values).collect();
                EvalKind::Taylor { terms, order }
            })
            .unwrap_or_else(|| EvalKind::Direct {
                coeffs: g.coeffs().to_vec(),
            });
        Self {
            n,
            center: center.to_vec(),
            radius: radius.to_vec(),
            kind,
        }
    }

    /// Builds an evaluator whose center and radius cover the given samples.
    pub(crate) fn covering(grid: &TorusGrid, g: &TrigPoly, shifts: &[Vec<f64>]) -> Self {
        let (center, radius) = bounding(shifts);
        Self::new(grid, g, &center, &radius)
    }

    fn choose_order(g: &TrigPoly, radius: &[f64], l1: f64) -> Option<usize> {
        if l1 == 0.0 {
            return Some(1);
        }
        let lat = g.lattice();
        let tol = 1e-17 * l1;
        let xs: Vec<(f64, f64)> = g
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(idx, c)| {
                let x: f64 = lat
                    .frequency(idx)
                    .iter()
                    .zip(radius)
                    .map(|(w, r)| w.abs() * r)
                    .sum();
                (c.norm_sqr().sqrt(), x)
            })
            .collect();
        let x_max = xs.iter().fold(0.0, |m, p| f64::max(m, p.1));
        if x_max > 40.0 {
            return None;
        }
        let growth: f64 = xs.iter().map(|(a, x)| a * x.exp()).sum();
        // The tails grow with x, so rounding every x up to one of a few
        // levels keeps the bound valid and makes it cheap.
        const LEVELS: usize = 48;
        let mut mass = [0.0; LEVELS];
        for (a, x) in &xs {
            let level = if x_max > 0.0 {
                ((x / x_max * LEVELS as f64).ceil() as usize).clamp(1, LEVELS) - 1
            } else {
                0
            };
            mass[level] += a;
        }
        let mut bound = vec![0.0; MAX_TAYLOR_ORDER + 1];
        let mut tails = vec![0.0; MAX_TAYLOR_ORDER + 1];
        let mut scratch = Vec::with_capacity(MAX_TAYLOR_ORDER + 100);
        for (level, a) in mass.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            exp_tails(x_max * (level + 1) as f64 / LEVELS as f64, &mut scratch, &mut tails);
            for (b, t) in bound.iter_mut().zip(&tails) {
                *b += a * t;
            }
        }
        if growth > MAX_TAYLOR_GROWTH * l1 {
            return None;
        }
        (1..=MAX_TAYLOR_ORDER).find(|&p| bound[p] <= tol)
    }

    pub(crate) fn is_direct(&self) -> bool {
        matches!(self.kind, EvalKind::Direct { .. })
    }

    #[cfg(test)]
    pub(crate) fn order(&self) -> Option<usize> {
        match &self.kind {
            EvalKind::Taylor { order, .. } => Some(*order),
            EvalKind::Direct { .. } => None,
        }
    }

    /// Whether every sample lies within the certified radius.
    pub(crate) fn covers(&self, shifts: &[Vec<f64>]) -> bool {
        if self.is_direct() {
            return true;
        }
        shifts.iter().enumerate().all(|(l, s)| {
            let (c, r) = (self.center[l], self.radius[l] * (1.0 + 1e-12) + 1e-300);
            s.iter().all(|v| (v - c).abs() <= r)
        })
    }

    /// `G(θ_j + Ωᵀ s_j)` for every grid point `j`; `shifts[l][j] = s_l(θ_j)`.
    pub(crate) fn eval(&self, grid: &TorusGrid, shifts: &[Vec<f64>]) -> Vec<f64> {
        debug_assert_eq!(shifts.len(), self.n);
        match &self.kind {
            EvalKind::Taylor { terms, order } => {
                let len = grid.len();
                if self.n == 1 {
                    // Horner in δ: Σ_p D_p δ^p / p!.
                    let s = &shifts[0];
                    let c = self.center[0];
                    let mut out = terms[order - 1].1.clone();
                    for p in (0..order - 1).rev() {
                        let dp = &terms[p].1;
                        let f = 1.0 / (p + 1) as f64;
                        for j in 0..len {
                            out[j] = dp[j] + out[j] * (s[j] - c) * f;
                        }
                    }
                    out
                } else {
                    let mut out = vec![0.0; len];
                    let mut pw = vec![vec![0.0; *order]; self.n];
                    for j in 0..len {
                        for l in 0..self.n {
                            let delta = shifts[l][j] - self.center[l];
                            pw[l][0] = 1.0;
                            for p in 1..*order {
                                pw[l][p] = pw[l][p - 1] * delta / p as f64;
                            }
                        }
                        let mut acc = 0.0;
                        for (beta, vals) in terms {
                            let mut w = vals[j];
                            for (l, &b) in beta.iter().enumerate() {
                                w *= pw[l][b];
                            }
                            acc += w;
                        }
                        out[j] = acc;
                    }
                    out
                }
            }
            EvalKind::Direct { coeffs } => direct_eval(grid, coeffs, shifts),
        }
    }
}

/// Center (midrange) and radius (half range) of each displacement component.
pub(crate) fn bounding(shifts: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    shifts
        .iter()
        .map(|s| {
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() && hi.is_finite() {
                (0.5 * (lo + hi), 0.5 * (hi - lo))
            } else {
                (0.0, 0.0)
            }
        })
        .unzip()
}

/// Sums every lattice mode at every shifted grid point; `O(M^d (2K+1)^d)`.
pub(crate) fn direct_eval(grid: &TorusGrid, coeffs: &[Complex64], shifts: &[Vec<f64>]) -> Vec<f64> {
    let lat = grid.lattice();
    let d = lat.d();
    let n = lat.n();
    let side = lat.side();
    let kk = lat.k_max() as i32;
    let mut pows = vec![vec![ZERO; side]; d];
    let mut buf_a = coeffs.to_vec();
    let mut buf_b = vec![ZERO; coeffs.len()];
    (0..grid.len())
        .map(|j| {
            let theta = grid.theta(j);
            for a in 0..d {
                let t = theta[a] + (0..n).map(|l| lat.omega(l, a) * shifts[l][j]).sum::<f64>();
                for (i, p) in pows[a].iter_mut().enumerate() {
                    *p = Complex64::from_polar(1.0, (i as i32 - kk) as f64 * t);
                }
            }
            // Contract the coefficient tensor one axis at a time, last first.
            buf_a.copy_from_slice(coeffs);
            let mut len = coeffs.len();
            for a in (0..d).rev() {
                let rows = len / side;
                for r in 0..rows {
                    let row = &buf_a[r * side..(r + 1) * side];
                    buf_b[r] = row.iter().zip(&pows[a]).map(|(c, p)| c * p).sum();
                }
                len = rows;
                std::mem::swap(&mut buf_a, &mut buf_b);
            }
            buf_a[0].re
        })
        .collect()
}

/// Samples of each displacement component on the grid.
pub(crate) fn sample_field(grid: &TorusGrid, f: &VectorField) -> Vec<Vec<f64>> {
    f.components().iter().map(|c| grid.sample(c)).collect()
}

/// `g ∘ (id + f)` for a displacement field `f`, without margin validation.
pub(crate) fn compose_displacement(
    grid: &TorusGrid,
    g: &VectorField,
    f: &VectorField,
) -> Result<CompositionReport<VectorField>> {
    if !g.is_compatible(f) {
        return Err(ApError::LatticeMismatch);
    }
    let shifts = sample_field(grid, f);
    compose_on_shifts(grid, g, &shifts)
}

pub(crate) fn compose_on_shifts(
    grid: &TorusGrid,
    g: &VectorField,
    shifts: &[Vec<f64>],
) -> Result<CompositionReport<VectorField>> {
    let (center, radius) = bounding(shifts);
    let mut aliased = 0.0;
    let mut comps = Vec::with_capacity(g.n());
    for c in g.components() {
        let ev = ShiftEvaluator::new(grid, c, &center, &radius);
        let vals = ev.eval(grid, shifts);
        let (p, a) = grid.project(&vals);
        aliased += a;
        comps.push(p);
    }
    Ok(CompositionReport {
        result: VectorField::new(comps)?,
        aliased_mass: aliased,
    })
}

/// Same as [`compose_on_shifts`] but always through direct summation; kept
/// as an independent reference path.
#[cfg(test)]
pub(crate) fn compose_direct_on_shifts(
    grid: &TorusGrid,
    g: &VectorField,
    shifts: &[Vec<f64>],
) -> Result<CompositionReport<VectorField>> {
    let mut aliased = 0.0;
    let mut comps = Vec::with_capacity(g.n());
    for c in g.components() {
        let vals = direct_eval(grid, c.coeffs(), shifts);
        let (p, a) = grid.project(&vals);
        aliased += a;
        comps.push(p);
    }
    Ok(CompositionReport {
        result: VectorField::new(comps)?,
        aliased_mass: aliased,
    })
}
