//! Coefficient-level algebra of real trigonometric polynomials on a
//! [`FrequencyLattice`].
//!
//! A [`TrigPoly`] stores the full Hermitian coefficient array; every
//! constructor and operation re-imposes `c(-k) = conj(c(k))` and a real
//! zero mode, so point evaluations are real by construction.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{ApError, Result};
use crate::lattice::FrequencyLattice;

#[derive(Debug, Clone)]
pub struct TrigPoly {
    lattice: Arc<FrequencyLattice>,
    coeffs: Vec<Complex64>,
}

/// Result of a truncated product: the product restricted to `|k|_∞ ≤ K`
/// together with the l1 mass of the dropped coefficients.
#[derive(Debug, Clone)]
pub struct Product {
    pub poly: TrigPoly,
    pub discarded_mass: f64,
}

impl TrigPoly {
    pub fn zero(lattice: &Arc<FrequencyLattice>) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    pub fn constant(lattice: &Arc<FrequencyLattice>, c: f64) -> Self {
        let mut p = Self::zero(lattice);
        let center = lattice.center();
        p.coeffs[center] = Complex64::new(c, 0.0);
        p
    }

    /// Builds a polynomial from a full coefficient array, symmetrizing it.
    pub fn from_coeffs(lattice: &Arc<FrequencyLattice>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(ApError::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        let mut p = Self {
            lattice: Arc::clone(lattice),
            coeffs,
        };
        p.hermitize();
        Ok(p)
    }

    /// Builds a polynomial from canonical modes; each mode also sets its
    /// conjugate partner. Repeated indices accumulate.
    pub fn from_modes(
        lattice: &Arc<FrequencyLattice>,
        modes: &[(Vec<i64>, Complex64)],
    ) -> Result<Self> {
        let mut p = Self::zero(lattice);
        for (k, c) in modes {
            let idx = lattice.linear(k).ok_or_else(|| {
                ApError::InvalidParameter(format!("index {k:?} outside the lattice"))
            })?;
            if idx == lattice.center() {
                p.coeffs[idx].re += c.re;
            } else {
                let (canon, value) = if lattice.is_canonical(idx) {
                    (idx, *c)
                } else {
                    (lattice.negated(idx), c.conj())
                };
                p.coeffs[canon] += value;
                let neg = lattice.negated(canon);
                p.coeffs[neg] = p.coeffs[canon].conj();
            }
        }
        Ok(p)
    }

    /// `amp · cos(Λ(k)·x)`.
    pub fn cos_mode(lattice: &Arc<FrequencyLattice>, k: &[i64], amp: f64) -> Result<Self> {
        if k.iter().all(|&v| v == 0) {
            return Ok(Self::constant(lattice, amp));
        }
        Self::from_modes(lattice, &[(k.to_vec(), Complex64::new(amp / 2.0, 0.0))])
    }

    /// `amp · sin(Λ(k)·x)`.
    pub fn sin_mode(lattice: &Arc<FrequencyLattice>, k: &[i64], amp: f64) -> Result<Self> {
        if k.iter().all(|&v| v == 0) {
            return Ok(Self::zero(lattice));
        }
        Self::from_modes(lattice, &[(k.to_vec(), Complex64::new(0.0, -amp / 2.0))])
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> Option<Complex64> {
        self.lattice.linear(k).map(|i| self.coeffs[i])
    }

    /// Canonical half-lattice entries `(k, c_k)`, zero mode first.
    pub fn canonical_modes(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        (self.lattice.center()..self.lattice.len()).map(move |i| (self.lattice.index(i), self.coeffs[i]))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice.is_compatible(&other.lattice) {
            Ok(())
        } else {
            Err(ApError::LatticeMismatch)
        }
    }

    /// Re-imposes `c(-k) = conj(c(k))` and a real zero mode by averaging
    /// each Hermitian pair.
    pub fn hermitize(&mut self) {
        let lat = &self.lattice;
        let center = lat.center();
        for idx in center + 1..lat.len() {
            let neg = lat.negated(idx);
            let avg = (self.coeffs[idx] + self.coeffs[neg].conj()) * 0.5;
            self.coeffs[idx] = avg;
            self.coeffs[neg] = avg.conj();
        }
        self.coeffs[center].im = 0.0;
    }

    /// Sum of |c_k| over the full lattice.
    pub fn l1_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `a·f + b·g`.
    pub fn linear_combine(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        f.check(g)?;
        Ok(Self {
            lattice: Arc::clone(&f.lattice),
            coeffs: f
                .coeffs
                .iter()
                .zip(&g.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(1.0, self, -1.0, other)
    }

    /// Truncated product by index convolution `k = k₁ + k₂`.
    pub fn multiply(&self, other: &Self) -> Result<Product> {
        self.check(other)?;
        let lat = &self.lattice;
        let d = lat.d();
        let kk = lat.k_max() as i64;
        let side = lat.side() as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); lat.len()];
        let mut discarded = 0.0;
        let nz_a: Vec<(usize, Complex64)> = nonzero(&self.coeffs);
        let nz_b: Vec<(usize, Complex64)> = nonzero(&other.coeffs);
        let ka: Vec<Vec<i64>> = nz_a.iter().map(|(i, _)| lat.index(*i)).collect();
        let kb: Vec<Vec<i64>> = nz_b.iter().map(|(i, _)| lat.index(*i)).collect();
        // Mass of dropped modes is collected per output index so that a
        // dropped mode fed by several pairs counts once.
        let mut dropped: std::collections::HashMap<Vec<i64>, Complex64> =
            std::collections::HashMap::new();
        let mut k = vec![0i64; d];
        for (ia, (_, ca)) in nz_a.iter().enumerate() {
            for (ib, (_, cb)) in nz_b.iter().enumerate() {
                let mut inside = true;
                let mut idx = 0i64;
                for j in 0..d {
                    k[j] = ka[ia][j] + kb[ib][j];
                    if k[j].abs() > kk {
                        inside = false;
                    }
                    idx = idx * side + (k[j] + kk);
                }
                let prod = ca * cb;
                if inside {
                    out[idx as usize] += prod;
                } else {
                    *dropped.entry(k.clone()).or_default() += prod;
                }
            }
        }
        for c in dropped.values() {
            discarded += c.norm();
        }
        let poly = Self::from_coeffs(lat, out)?;
        Ok(Product {
            poly,
            discarded_mass: discarded,
        })
    }

    /// Partial derivative along physical axis `l` (zero-based).
    pub fn derivative(&self, l: usize) -> Result<Self> {
        let lat = &self.lattice;
        if l >= lat.n() {
            return Err(ApError::AxisOutOfRange {
                axis: l,
                dimension: lat.n(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, lat.frequency(i)[l]))
            .collect();
        Self::from_coeffs(lat, coeffs)
    }

    /// Translate: `x ↦ f(x + c)`.
    pub fn shift(&self, c: &[f64]) -> Self {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let phase: f64 = lat.frequency(i).iter().zip(c).map(|(w, x)| w * x).sum();
                v * Complex64::from_polar(1.0, phase)
            })
            .collect();
        let mut p = Self {
            lattice: Arc::clone(lat),
            coeffs,
        };
        p.hermitize();
        p
    }

    /// Bohr mean value: the zero-frequency coefficient.
    pub fn bohr_mean(&self) -> f64 {
        self.coeffs[self.lattice.center()].re
    }

    /// Point value, summed over the canonical half lattice so the result is
    /// real by construction.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let lat = &self.lattice;
        let center = lat.center();
        let mut acc = 0.0;
        for idx in center + 1..lat.len() {
            let c = self.coeffs[idx];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let phase: f64 = lat.frequency(idx).iter().zip(x).map(|(w, xl)| w * xl).sum();
            let (s, co) = phase.sin_cos();
            acc += c.re * co - c.im * s;
        }
        self.coeffs[center].re + 2.0 * acc
    }

    /// Full complex sum `Σ_k c_k e^{iΛ(k)·x}` over the whole lattice; the
    /// imaginary part measures any departure from realness.
    pub fn evaluate_complex(&self, x: &[f64]) -> Complex64 {
        let lat = &self.lattice;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let phase: f64 = lat.frequency(idx).iter().zip(x).map(|(w, xl)| w * xl).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Largest coefficient-wise difference.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn map_coeffs(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| f(i, *c))
            .collect();
        let mut p = Self {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        };
        p.hermitize();
        p
    }
}

fn nonzero(c: &[Complex64]) -> Vec<(usize, Complex64)> {
    c.iter()
        .enumerate()
        .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
        .map(|(i, v)| (i, *v))
        .collect()
}

/// `n` scalar components on one shared lattice.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<TrigPoly>,
}

impl VectorField {
    pub fn new(components: Vec<TrigPoly>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| ApError::InvalidParameter("vector field needs a component".into()))?;
        if components.len() != first.lattice.n() {
            return Err(ApError::InvalidParameter(format!(
                "vector field on R^{} needs {} components, got {}",
                first.lattice.n(),
                first.lattice.n(),
                components.len()
            )));
        }
        for c in &components[1..] {
            first.check(c)?;
        }
        Ok(Self { components })
    }

    /// Wraps a scalar polynomial on a one-dimensional lattice.
    pub fn scalar(f: TrigPoly) -> Result<Self> {
        Self::new(vec![f])
    }

    pub fn zero(lattice: &Arc<FrequencyLattice>) -> Self {
        Self {
            components: (0..lattice.n()).map(|_| TrigPoly::zero(lattice)).collect(),
        }
    }

    pub fn constant(lattice: &Arc<FrequencyLattice>, c: &[f64]) -> Result<Self> {
        if c.len() != lattice.n() {
            return Err(ApError::InvalidParameter("constant has wrong length".into()));
        }
        Ok(Self {
            components: c.iter().map(|&v| TrigPoly::constant(lattice, v)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        self.components[0].lattice()
    }

    pub fn components(&self) -> &[TrigPoly] {
        &self.components
    }

    pub fn component(&self, l: usize) -> &TrigPoly {
        &self.components[l]
    }

    pub fn into_components(self) -> Vec<TrigPoly> {
        self.components
    }

    pub fn is_compatible(&self, other: &Self) -> bool {
        self.lattice().is_compatible(other.lattice())
    }

    pub fn linear_combine(a: f64, u: &Self, b: f64, v: &Self) -> Result<Self> {
        let components = u
            .components
            .iter()
            .zip(&v.components)
            .map(|(x, y)| TrigPoly::linear_combine(a, x, b, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(1.0, self, -1.0, other)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
        }
    }

    pub fn shift(&self, c: &[f64]) -> Self {
        Self {
            components: self.components.iter().map(|p| p.shift(c)).collect(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.evaluate(x)).collect()
    }

    pub fn l1_mass(&self) -> f64 {
        self.components.iter().map(TrigPoly::l1_mass).sum()
    }

    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            m = m.max(a.max_coeff_diff(b)?);
        }
        Ok(m)
    }

    pub(crate) fn map_components(&self, f: impl FnMut(&TrigPoly) -> TrigPoly) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }
}

/// Parameter α of `A_α = I − α²Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    alpha: f64,
}

impl MetricParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(ApError::InvalidParameter(format!(
                "alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Fourier multiplier `1 + α²|Λ(k)|²`.
    pub fn multiplier(&self, lattice: &FrequencyLattice, idx: usize) -> f64 {
        1.0 + self.alpha * self.alpha * lattice.frequency_norm_sqr(idx)
    }
}

/// `⟨u, v⟩_α = Σ_k (1 + α²|Λ(k)|²) û(k)·conj(v̂(k))`, the Bohr mean of
/// `(A_α u, v)`.
pub fn inner_product_alpha(u: &VectorField, v: &VectorField, p: MetricParams) -> Result<f64> {
    if !u.is_compatible(v) || u.n() != v.n() {
        return Err(ApError::LatticeMismatch);
    }
    let lat = u.lattice();
    let mut acc = 0.0;
    for (a, b) in u.components.iter().zip(&v.components) {
        for (idx, (x, y)) in a.coeffs.iter().zip(&b.coeffs).enumerate() {
            acc += p.multiplier(lat, idx) * (x.re * y.re + x.im * y.im);
        }
    }
    Ok(acc)
}

pub fn apply_a_alpha(u: &VectorField, p: MetricParams) -> VectorField {
    let lat = Arc::clone(u.lattice());
    u.map_components(|c| c.map_coeffs(|i, v| v * p.multiplier(&lat, i)))
}

pub fn invert_a_alpha(m: &VectorField, p: MetricParams) -> VectorField {
    let lat = Arc::clone(m.lattice());
    m.map_components(|c| c.map_coeffs(|i, v| v / p.multiplier(&lat, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat1() -> Arc<FrequencyLattice> {
        Arc::new(FrequencyLattice::one_dim(&[1.0], 4).unwrap())
    }

    fn lat_qp(k: usize) -> Arc<FrequencyLattice> {
        Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], k).unwrap())
    }

    #[test]
    fn linear_combinations() {
        let lat = lat1();
        let c = TrigPoly::cos_mode(&lat, &[1], 1.0).unwrap();
        let s = TrigPoly::sin_mode(&lat, &[1], 1.0).unwrap();
        let two_c = TrigPoly::linear_combine(1.0, &c, 1.0, &c).unwrap();
        assert!((two_c.evaluate(&[0.3]) - 2.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!(TrigPoly::linear_combine(1.0, &c, -1.0, &c).unwrap().is_zero());
        let mix = TrigPoly::linear_combine(2.0, &c, 3.0, &s).unwrap();
        assert_eq!(mix.evaluate(&[0.0]), 2.0);
    }

    #[test]
    fn mismatched_lattices_are_rejected() {
        let a = TrigPoly::constant(&lat1(), 1.0);
        let b = TrigPoly::constant(&lat_qp(2), 1.0);
        assert_eq!(a.add(&b).unwrap_err(), ApError::LatticeMismatch);
        assert!(matches!(a.multiply(&b), Err(ApError::LatticeMismatch)));
    }

    #[test]
    fn product_to_sum() {
        let lat = lat_qp(2);
        let a = TrigPoly::cos_mode(&lat, &[1, 0], 1.0).unwrap();
        let b = TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap();
        let p = a.multiply(&b).unwrap();
        assert_eq!(p.discarded_mass, 0.0);
        let expected = TrigPoly::linear_combine(
            0.5,
            &TrigPoly::cos_mode(&lat, &[1, 1], 1.0).unwrap(),
            0.5,
            &TrigPoly::cos_mode(&lat, &[1, -1], 1.0).unwrap(),
        )
        .unwrap();
        assert!(p.poly.max_coeff_diff(&expected).unwrap() < 1e-16);
    }

    #[test]
    fn product_with_one_and_truncation_mass() {
        let lat = lat1();
        let f = TrigPoly::sin_mode(&lat, &[3], 0.7).unwrap();
        let one = TrigPoly::constant(&lat, 1.0);
        let p = f.multiply(&one).unwrap();
        assert_eq!(p.discarded_mass, 0.0);
        assert!(p.poly.max_coeff_diff(&f).unwrap() < 1e-16);

        let lat = Arc::new(FrequencyLattice::one_dim(&[1.0], 1).unwrap());
        let c = TrigPoly::cos_mode(&lat, &[1], 1.0).unwrap();
        let sq = c.multiply(&c).unwrap();
        assert!((sq.poly.bohr_mean() - 0.5).abs() < 1e-16);
        assert!((sq.discarded_mass - 0.5).abs() < 1e-16);
        assert!(sq.poly.coeff(&[1]).unwrap().norm() < 1e-16);
    }

    #[test]
    fn derivatives() {
        let lat = lat_qp(2);
        let c = TrigPoly::cos_mode(&lat, &[1, 0], 1.0).unwrap();
        let dc = c.derivative(0).unwrap();
        let ms = TrigPoly::sin_mode(&lat, &[1, 0], -1.0).unwrap();
        assert!(dc.max_coeff_diff(&ms).unwrap() < 1e-16);
        assert!(TrigPoly::constant(&lat, 4.0).derivative(0).unwrap().is_zero());
        let c2 = TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap();
        let expected = TrigPoly::sin_mode(&lat, &[0, 1], -2f64.sqrt()).unwrap();
        assert!(c2.derivative(0).unwrap().max_coeff_diff(&expected).unwrap() < 1e-15);
        assert!(matches!(
            c.derivative(1),
            Err(ApError::AxisOutOfRange { axis: 1, dimension: 1 })
        ));
    }

    #[test]
    fn shifts() {
        let lat = lat1();
        let c = TrigPoly::cos_mode(&lat, &[1], 1.0).unwrap();
        let s = c.shift(&[PI / 2.0]);
        let ms = TrigPoly::sin_mode(&lat, &[1], -1.0).unwrap();
        assert!(s.max_coeff_diff(&ms).unwrap() < 1e-16);
        let k = TrigPoly::constant(&lat, 2.5);
        assert_eq!(k.shift(&[1.234]).bohr_mean(), 2.5);
        let f = TrigPoly::from_modes(
            &lat,
            &[
                (vec![1], Complex64::new(0.3, -0.1)),
                (vec![3], Complex64::new(-0.2, 0.05)),
            ],
        )
        .unwrap();
        let back = f.shift(&[0.77]).shift(&[-0.77]);
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-16);
    }

    #[test]
    fn bohr_means() {
        let lat = lat_qp(2);
        assert_eq!(TrigPoly::constant(&lat, 3.0).bohr_mean(), 3.0);
        assert_eq!(TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap().bohr_mean(), 0.0);
        let f = TrigPoly::constant(&lat, 2.0)
            .add(&TrigPoly::cos_mode(&lat, &[1, 0], 1.0).unwrap())
            .unwrap()
            .add(&TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap())
            .unwrap();
        assert_eq!(f.bohr_mean(), 2.0);
    }

    #[test]
    fn evaluation() {
        let lat = lat_qp(2);
        let c = TrigPoly::cos_mode(&lat, &[1, 0], 1.0).unwrap();
        assert_eq!(c.evaluate(&[0.0]), 1.0);
        let f = TrigPoly::constant(&lat, 2.0).add(&c).unwrap();
        assert!((f.evaluate(&[PI]) - 1.0).abs() < 1e-15);
        let g = c.add(&TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap()).unwrap();
        // cos 1 + cos √2, computed by plain scalar arithmetic.
        assert!((g.evaluate(&[1.0]) - 0.696_245_6).abs() < 1e-6);
        assert!((g.evaluate(&[1.0]) - (1f64.cos() + 2f64.sqrt().cos())).abs() < 1e-15);
    }

    #[test]
    fn a_alpha_multipliers() {
        let lat = lat1();
        let p1 = MetricParams::new(1.0).unwrap();
        let u = VectorField::scalar(TrigPoly::cos_mode(&lat, &[1], 1.0).unwrap()).unwrap();
        let au = apply_a_alpha(&u, p1);
        assert!(au.max_coeff_diff(&u.scaled(2.0)).unwrap() < 1e-16);
        let c = VectorField::constant(&lat, &[1.5]).unwrap();
        assert!(apply_a_alpha(&c, p1).max_coeff_diff(&c).unwrap() == 0.0);
        let p0 = MetricParams::new(0.0).unwrap();
        assert!(apply_a_alpha(&u, p0).max_coeff_diff(&u).unwrap() == 0.0);
        assert!(invert_a_alpha(&au, p1).max_coeff_diff(&u).unwrap() < 1e-16);
        assert!(MetricParams::new(-1.0).is_err());
    }

    #[test]
    fn inner_products() {
        let lat = lat_qp(2);
        let p = MetricParams::new(1.0).unwrap();
        let c = VectorField::constant(&lat, &[3.0]).unwrap();
        assert_eq!(inner_product_alpha(&c, &c, p).unwrap(), 9.0);
        let u = VectorField::scalar(TrigPoly::cos_mode(&lat, &[1, 0], 1.0).unwrap()).unwrap();
        let v = VectorField::scalar(TrigPoly::cos_mode(&lat, &[0, 1], 1.0).unwrap()).unwrap();
        assert_eq!(inner_product_alpha(&u, &v, p).unwrap(), 0.0);
        // (1 + α²)/2 with α = 1.
        assert!((inner_product_alpha(&u, &u, p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vector_field_shape_checks() {
        let lat2 = Arc::new(FrequencyLattice::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap());
        let a = TrigPoly::constant(&lat2, 1.0);
        assert!(VectorField::new(vec![a.clone()]).is_err());
        assert!(VectorField::new(vec![a.clone(), a]).is_ok());
    }
}
