//! Grid lower bounds for sup, Hölder and `C^m` norms, and the vanishing
//! modulus diagnostic of the little Hölder spaces.
//!
//! Every estimate is a maximum over finitely many probes, so it bounds the
//! true quantity from below and reports the grid it used. Polynomials are
//! probed on their torus lift, where `x ↦ f(x + h)` is the shifted spectrum.
//! For `n ≥ 2` the offsets run along the coordinate axes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::TrigPoly;
use crate::error::{ApError, Result};
use crate::torus::TorusGrid;

/// Largest number of torus grid points used by one estimate.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Default number of dyadic offsets `h_max·2^{−j}`, `j = 0..24`.
pub const DEFAULT_LEVELS: usize = 25;

/// A scalar function of one real variable that can be probed pointwise.
pub trait EvaluableFunction {
    fn eval(&self, x: f64) -> f64;

    /// Interval `[a, b]` on which evaluation is total and finite.
    fn probe_interval(&self) -> (f64, f64);

    /// Known period. Probes then cover one period and wrap around.
    fn period(&self) -> Option<f64> {
        None
    }
}

/// A closure with its probe interval.
pub struct FnProbe<F> {
    f: F,
    interval: (f64, f64),
    period: Option<f64>,
}

impl<F: Fn(f64) -> f64> FnProbe<F> {
    pub fn new(f: F, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ApError::InvalidParameter(format!("bad probe interval [{a}, {b}]")));
        }
        Ok(Self {
            f,
            interval: (a, b),
            period: None,
        })
    }

    /// A function of period `p`, probed on `[a, a + p]`.
    pub fn periodic(f: F, a: f64, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(ApError::InvalidParameter(format!("bad period {p}")));
        }
        let mut probe = Self::new(f, a, a + p)?;
        probe.period = Some(p);
        Ok(probe)
    }
}

impl<F: Fn(f64) -> f64> EvaluableFunction for FnProbe<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn probe_interval(&self) -> (f64, f64) {
        self.interval
    }

    fn period(&self) -> Option<f64> {
        self.period
    }
}

/// What a norm is taken of.
#[derive(Clone, Copy)]
pub enum NormTarget<'a> {
    Poly(&'a TrigPoly),
    Sampled(&'a dyn EvaluableFunction),
}

impl<'a> From<&'a TrigPoly> for NormTarget<'a> {
    fn from(p: &'a TrigPoly) -> Self {
        NormTarget::Poly(p)
    }
}

impl<'a, F: Fn(f64) -> f64> From<&'a FnProbe<F>> for NormTarget<'a> {
    fn from(p: &'a FnProbe<F>) -> Self {
        NormTarget::Sampled(p)
    }
}

/// Offsets `h` at which differences are probed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OffsetSet {
    /// `h_max·2^{−j}` for `j < levels`.
    Dyadic { levels: usize },
    /// `h_max·j/count` for `1 ≤ j ≤ count`.
    Uniform { count: usize },
    Explicit(Vec<f64>),
}

impl Default for OffsetSet {
    fn default() -> Self {
        OffsetSet::Dyadic {
            levels: DEFAULT_LEVELS,
        }
    }
}

impl OffsetSet {
    pub fn offsets(&self, h_max: f64) -> Vec<f64> {
        match self {
            OffsetSet::Dyadic { levels } => (0..*levels).map(|j| h_max * 0.5f64.powi(j as i32)).collect(),
            OffsetSet::Uniform { count } => (1..=*count).map(|j| h_max * j as f64 / *count as f64).collect(),
            OffsetSet::Explicit(h) => h.iter().map(|h| h.abs()).filter(|h| *h > 0.0).collect(),
        }
    }
}

/// A norm estimate and the grid it was taken on (points per torus axis, or
/// probe points for sampled functions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Vanishing,
    NonVanishing,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Vanishing => "vanishing",
            Verdict::NonVanishing => "non-vanishing",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Estimates of `ω_γ(δ) = sup_{0<h<δ, x} |f(x+h) − f(x)|/h^γ`, with δ
/// decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusProfile {
    pub gamma: f64,
    pub grid: usize,
    pub points: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

/// The last value below 5% of the first (or an all-zero profile) counts as
/// vanishing; a last value of at least half the first as non-vanishing.
fn verdict(points: &[(f64, f64)]) -> Verdict {
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return Verdict::Inconclusive;
    };
    let (first, last) = (first.1, last.1);
    if first == 0.0 || last < 0.05 * first {
        Verdict::Vanishing
    } else if last >= 0.5 * first {
        Verdict::NonVanishing
    } else {
        Verdict::Inconclusive
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ApError::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

/// Torus grid with at most [`MAX_GRID_POINTS`] points that still resolves
/// the lattice.
fn poly_grid(p: &TrigPoly, m: usize) -> Result<TorusGrid> {
    let lat = p.lattice();
    let d = lat.d() as u32;
    let mut m = m.max(1);
    if m.checked_pow(d).is_none_or(|len| len > MAX_GRID_POINTS) {
        m = (MAX_GRID_POINTS as f64).powf(1.0 / d as f64).round() as usize;
        while m.pow(d) > MAX_GRID_POINTS {
            m -= 1;
        }
    }
    TorusGrid::new(lat, m.max(lat.side()))
}

/// Half the longest generator period.
fn poly_h_max(p: &TrigPoly) -> f64 {
    let lat = p.lattice();
    let shortest = (0..lat.d())
        .map(|j| (0..lat.n()).map(|l| lat.omega(l, j).powi(2)).sum::<f64>().sqrt())
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);
    if shortest.is_finite() {
        PI / shortest
    } else {
        1.0
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Probe points for a sampled function: `M` points per period, or `M + 1`
/// points including both ends of the interval.
struct ProbeGrid {
    xs: Vec<f64>,
    values: Vec<f64>,
    interval: (f64, f64),
    period: Option<f64>,
}

impl ProbeGrid {
    fn new(f: &dyn EvaluableFunction, m: usize) -> Self {
        let m = m.max(2);
        let (a, b) = f.probe_interval();
        let period = f.period();
        let count = if period.is_some() { m } else { m + 1 };
        let xs: Vec<f64> = (0..count).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let values = xs.iter().map(|x| f.eval(*x)).collect();
        Self {
            xs,
            values,
            interval: (a, b),
            period,
        }
    }

    fn h_max(&self) -> f64 {
        0.5 * (self.interval.1 - self.interval.0)
    }

    /// Largest `|f(x ± h) − f(x)|` over probe points whose partner stays in
    /// the interval (always, for periodic functions).
    fn max_difference(&self, f: &dyn EvaluableFunction, h: f64) -> f64 {
        let (a, b) = self.interval;
        let mut best = 0.0f64;
        for (x, v) in self.xs.iter().zip(&self.values) {
            for y in [x + h, x - h] {
                let y = match self.period {
                    Some(p) => a + (y - a).rem_euclid(p),
                    None if y < a || y > b => continue,
                    None => y,
                };
                best = best.max((f.eval(y) - v).abs());
            }
        }
        best
    }
}

/// `max_x |f(x + h) − f(x)|` for each offset, on the torus. Offsets run along
/// every coordinate axis.
fn poly_differences(grid: &TorusGrid, p: &TrigPoly, hs: &[f64]) -> Vec<f64> {
    let lat = p.lattice();
    let n = lat.n();
    let mut out = Vec::with_capacity(hs.len());
    const BATCH: usize = 16;
    for chunk in hs.chunks(BATCH) {
        let spectra: Vec<Vec<Complex64>> = chunk
            .iter()
            .flat_map(|&h| (0..n).map(move |l| (h, l)))
            .map(|(h, l)| {
                p.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| c * (Complex64::from_polar(1.0, lat.frequency(idx)[l] * h) - 1.0))
                    .collect()
            })
            .collect();
        let samples = grid.sample_spectra(&spectra);
        for per_h in samples.chunks(n) {
            out.push(per_h.iter().map(|s| max_abs(s)).fold(0.0, f64::max));
        }
    }
    out
}

/// Offsets, their maximal differences, and the grid used.
fn differences(target: NormTarget<'_>, hs: impl FnOnce(f64) -> Vec<f64>, m: usize) -> Result<(Vec<(f64, f64)>, usize)> {
    match target {
        NormTarget::Poly(p) => {
            let grid = poly_grid(p, m)?;
            let hs = hs(poly_h_max(p));
            let diffs = poly_differences(&grid, p, &hs);
            Ok((hs.into_iter().zip(diffs).collect(), grid.m()))
        }
        NormTarget::Sampled(f) => {
            let probe = ProbeGrid::new(f, m);
            let hs = hs(probe.h_max());
            let pairs = hs.into_iter().map(|h| (h, probe.max_difference(f, h))).collect();
            Ok((pairs, probe.xs.len()))
        }
    }
}

/// `max |f|` over the grid.
pub fn sup_norm(target: NormTarget<'_>, m: usize) -> Result<NormReport> {
    match target {
        NormTarget::Poly(p) => {
            let grid = poly_grid(p, m)?;
            Ok(NormReport {
                value: max_abs(&grid.sample(p)),
                grid: grid.m(),
            })
        }
        NormTarget::Sampled(f) => {
            let probe = ProbeGrid::new(f, m);
            Ok(NormReport {
                value: max_abs(&probe.values),
                grid: probe.xs.len(),
            })
        }
    }
}

/// `max |f(x + h) − f(x)|/h^γ` over grid points and offsets.
pub fn holder_seminorm(target: NormTarget<'_>, gamma: f64, m: usize, offsets: &OffsetSet) -> Result<NormReport> {
    check_gamma(gamma)?;
    let (pairs, grid) = differences(target, |h_max| offsets.offsets(h_max), m)?;
    let value = pairs.iter().map(|(h, d)| d / h.powf(gamma)).fold(0.0, f64::max);
    Ok(NormReport { value, grid })
}

/// Multi-indices of total degree exactly `k` in `n` variables.
fn multi_indices_of_degree(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn fill(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            fill(cur, pos + 1, left - v, out);
        }
    }
    let mut out = Vec::new();
    fill(&mut vec![0; n], 0, k, &mut out);
    out
}

fn partial(p: &TrigPoly, beta: &[usize]) -> Result<TrigPoly> {
    let mut q = p.clone();
    for (l, &b) in beta.iter().enumerate() {
        for _ in 0..b {
            q = q.derivative(l)?;
        }
    }
    Ok(q)
}

/// `max_{|β| ≤ m} |∂^β f|_∞` for integer `m`, and `|f|_k + max_{|β|=k}
/// [∂^β f]_γ` for `m = k + γ`. Sampled functions admit only `m < 1`.
pub fn cm_norm(target: NormTarget<'_>, m_order: f64, m: usize, offsets: &OffsetSet) -> Result<NormReport> {
    if !(m_order >= 0.0 && m_order.is_finite()) {
        return Err(ApError::InvalidParameter(format!("order must be a nonnegative number, got {m_order}")));
    }
    let k = m_order.floor() as usize;
    let gamma = m_order - k as f64;
    match target {
        NormTarget::Sampled(_) => {
            if m_order >= 1.0 {
                return Err(ApError::UnsupportedOrder { m: m_order });
            }
            let sup = sup_norm(target, m)?;
            if gamma == 0.0 {
                return Ok(sup);
            }
            let semi = holder_seminorm(target, gamma, m, offsets)?;
            Ok(NormReport {
                value: sup.value + semi.value,
                grid: sup.grid,
            })
        }
        NormTarget::Poly(p) => {
            let n = p.lattice().n();
            let mut value = 0.0f64;
            let mut grid = 0;
            for deg in 0..=k {
                for beta in multi_indices_of_degree(n, deg) {
                    let r = sup_norm(NormTarget::Poly(&partial(p, &beta)?), m)?;
                    value = value.max(r.value);
                    grid = r.grid;
                }
            }
            if gamma > 0.0 {
                let mut semi = 0.0f64;
                for beta in multi_indices_of_degree(n, k) {
                    let r = holder_seminorm(NormTarget::Poly(&partial(p, &beta)?), gamma, m, offsets)?;
                    semi = semi.max(r.value);
                }
                value += semi;
            }
            Ok(NormReport { value, grid })
        }
    }
}

/// `ω_γ(δ)` for each δ of a strictly decreasing list. Offsets `δ·2^{−j/2}`,
/// `j = 1..12`, are pooled over all δ, and each `ω_γ(δ)` is the maximum over
/// the pooled offsets below δ, so the profile is monotone by construction.
pub fn little_holder_profile(target: NormTarget<'_>, gamma: f64, deltas: &[f64], m: usize) -> Result<ModulusProfile> {
    check_gamma(gamma)?;
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(ApError::InvalidParameter("deltas must be positive and finite".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ApError::InvalidParameter("deltas must be strictly decreasing".into()));
    }
    let pool: Vec<f64> = deltas
        .iter()
        .flat_map(|d| (1..=12).map(move |j| d * 2f64.powf(-0.5 * j as f64)))
        .collect();
    let (pairs, grid) = differences(target, |_| pool, m)?;
    let ratios: Vec<(f64, f64)> = pairs.into_iter().map(|(h, d)| (h, d / h.powf(gamma))).collect();
    let points: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&delta| {
            let w = ratios
                .iter()
                .filter(|(h, _)| *h < delta)
                .fold(0.0f64, |m, (_, r)| m.max(*r));
            (delta, w)
        })
        .collect();
    Ok(ModulusProfile {
        gamma,
        grid,
        verdict: verdict(&points),
        points,
    })
}

/// `1, 10^{-1/2}, …` down to `1e-6`.
pub fn default_deltas() -> Vec<f64> {
    (0..=12).map(|j| 10f64.powf(-0.5 * j as f64)).collect()
}
