//! Finitely generated frequency lattices.
//!
//! A lattice is the set of physical frequencies `Λ(k) = Ω·k` for integer
//! index vectors `k ∈ Z^d` with `|k|_∞ ≤ K`. Coefficient arrays are stored
//! densely in row-major order over the index box `[-K, K]^d`, first axis most
//! significant, so the linear order coincides with the lexicographic order on
//! `k`. Two consequences are used throughout the crate:
//!
//! * the index of `-k` is `len - 1 - idx`;
//! * `k` is canonical (zero, or first nonzero entry positive) iff
//!   `idx >= center()`.

use crate::error::{ApError, Result};

/// Upper bound on `(2K+1)^d`, to keep dense coefficient arrays sane.
const MAX_MODES: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct FrequencyLattice {
    n: usize,
    d: usize,
    /// Ω stored row-major, `n × d`.
    omega: Vec<f64>,
    k_max: usize,
    /// Λ(k) for every linear index, `len × n`.
    freqs: Vec<f64>,
}

impl PartialEq for FrequencyLattice {
    fn eq(&self, other: &Self) -> bool {
        self.is_compatible(other)
    }
}

impl FrequencyLattice {
    /// Builds a lattice from the rows of Ω (`n` rows of length `d`) and the
    /// truncation order `K`.
    pub fn new(omega_rows: &[Vec<f64>], k_max: usize) -> Result<Self> {
        let n = omega_rows.len();
        if n == 0 {
            return Err(ApError::InvalidLattice("Ω must have at least one row".into()));
        }
        let d = omega_rows[0].len();
        if d == 0 {
            return Err(ApError::InvalidLattice("Ω must have at least one column".into()));
        }
        if omega_rows.iter().any(|r| r.len() != d) {
            return Err(ApError::InvalidLattice("Ω rows have unequal lengths".into()));
        }
        if k_max == 0 {
            return Err(ApError::InvalidLattice("truncation K must be at least 1".into()));
        }
        let omega: Vec<f64> = omega_rows.iter().flatten().copied().collect();
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(ApError::InvalidLattice("Ω has a nonfinite entry".into()));
        }
        let column = |j: usize| (0..n).map(|l| omega[l * d + j]).collect::<Vec<_>>();
        for j in 0..d {
            let cj = column(j);
            if cj.iter().all(|&w| w == 0.0) {
                return Err(ApError::InvalidLattice(format!("column {j} of Ω is zero")));
            }
            for i in 0..j {
                if column(i) == cj {
                    return Err(ApError::InvalidLattice(format!(
                        "columns {i} and {j} of Ω coincide"
                    )));
                }
            }
        }
        let side = 2 * k_max + 1;
        let len = side
            .checked_pow(d as u32)
            .filter(|&l| l <= MAX_MODES)
            .ok_or_else(|| {
                ApError::InvalidLattice(format!("(2K+1)^d exceeds {MAX_MODES} modes"))
            })?;

        let mut lattice = Self {
            n,
            d,
            omega,
            k_max,
            freqs: Vec::new(),
        };
        let mut freqs = vec![0.0; len * n];
        let mut k = vec![0i64; d];
        for idx in 0..len {
            lattice.index_into(idx, &mut k);
            for l in 0..n {
                freqs[idx * n + l] = (0..d).map(|j| lattice.omega[l * d + j] * k[j] as f64).sum();
            }
        }
        lattice.freqs = freqs;
        Ok(lattice)
    }

    /// One-dimensional lattice with generators `omegas`.
    pub fn one_dim(omegas: &[f64], k_max: usize) -> Result<Self> {
        Self::new(&[omegas.to_vec()], k_max)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Entries per axis of the index box, `2K + 1`.
    pub fn side(&self) -> usize {
        2 * self.k_max + 1
    }

    /// Total number of lattice indices, `(2K+1)^d`.
    pub fn len(&self) -> usize {
        self.freqs.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Linear index of `k = 0`.
    pub fn center(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn omega(&self, l: usize, j: usize) -> f64 {
        self.omega[l * self.d + j]
    }

    pub fn omega_rows(&self) -> Vec<Vec<f64>> {
        self.omega.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    /// Physical frequency Λ(k) of the linear index `idx`.
    pub fn frequency(&self, idx: usize) -> &[f64] {
        &self.freqs[idx * self.n..(idx + 1) * self.n]
    }

    /// |Λ(k)|² of the linear index `idx`.
    pub fn frequency_norm_sqr(&self, idx: usize) -> f64 {
        self.frequency(idx).iter().map(|w| w * w).sum()
    }

    /// Index of `-k`.
    pub fn negated(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn is_canonical(&self, idx: usize) -> bool {
        idx >= self.center()
    }

    /// Writes the index vector of `idx` into `k`.
    pub fn index_into(&self, mut idx: usize, k: &mut [i64]) {
        let side = self.side();
        for j in (0..self.d).rev() {
            k[j] = (idx % side) as i64 - self.k_max as i64;
            idx /= side;
        }
    }

    pub fn index(&self, idx: usize) -> Vec<i64> {
        let mut k = vec![0; self.d];
        self.index_into(idx, &mut k);
        k
    }

    /// Linear index of `k`, or `None` if `|k|_∞ > K` or the length is wrong.
    pub fn linear(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.d {
            return None;
        }
        let kk = self.k_max as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &kj in k {
            if kj.abs() > kk {
                return None;
            }
            idx = idx * side + (kj + kk) as usize;
        }
        Some(idx)
    }

    /// `|k|_∞` of a linear index.
    pub fn sup_index(&self, idx: usize) -> usize {
        let mut k = vec![0; self.d];
        self.index_into(idx, &mut k);
        k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Lattices are compatible when `n`, `d`, `K` and Ω agree bit-exactly.
    pub fn is_compatible(&self, other: &Self) -> bool {
        self.n == other.n
            && self.d == other.d
            && self.k_max == other.k_max
            && self
                .omega
                .iter()
                .zip(&other.omega)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Torus coordinates θ = Ωᵀx of a physical point.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|j| (0..self.n).map(|l| self.omega(l, j) * x[l]).sum())
            .collect()
    }

    /// Largest |Λ(k)|_l over the lattice, per physical axis.
    pub fn max_frequency(&self) -> Vec<f64> {
        (0..self.n)
            .map(|l| {
                (0..self.d)
                    .map(|j| self.omega(l, j).abs())
                    .sum::<f64>()
                    * self.k_max as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_freqs(lat: &FrequencyLattice) -> Vec<f64> {
        let mut f: Vec<f64> = (0..lat.len()).map(|i| lat.frequency(i)[0]).collect();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        f
    }

    #[test]
    fn integer_lattice() {
        let lat = FrequencyLattice::one_dim(&[1.0], 2).unwrap();
        assert_eq!(sorted_freqs(&lat), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn quasi_periodic_lattice_enumeration() {
        let s = 2f64.sqrt();
        let lat = FrequencyLattice::one_dim(&[1.0, s], 1).unwrap();
        assert_eq!(lat.len(), 9);
        let mut expected = vec![0.0, 1.0, -1.0, s, -s, 1.0 + s, -1.0 - s, 1.0 - s, s - 1.0];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in sorted_freqs(&lat).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn standard_torus() {
        let lat = FrequencyLattice::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1).unwrap();
        assert_eq!(lat.len(), 9);
        let idx = lat.linear(&[1, -1]).unwrap();
        assert_eq!(lat.frequency(idx), &[1.0, -1.0]);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(matches!(
            FrequencyLattice::one_dim(&[1.0, 0.0], 2),
            Err(ApError::InvalidLattice(_))
        ));
        assert!(matches!(
            FrequencyLattice::one_dim(&[1.0, 1.0], 2),
            Err(ApError::InvalidLattice(_))
        ));
        assert!(matches!(
            FrequencyLattice::one_dim(&[f64::NAN], 2),
            Err(ApError::InvalidLattice(_))
        ));
        assert!(FrequencyLattice::one_dim(&[1.0], 0).is_err());
    }

    #[test]
    fn index_layout() {
        let lat = FrequencyLattice::one_dim(&[1.0, 3f64.sqrt()], 3).unwrap();
        for idx in 0..lat.len() {
            let k = lat.index(idx);
            assert_eq!(lat.linear(&k), Some(idx));
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            assert_eq!(lat.linear(&neg), Some(lat.negated(idx)));
            let canonical = k.iter().find(|&&v| v != 0).is_none_or(|&v| v > 0);
            assert_eq!(lat.is_canonical(idx), canonical);
        }
        assert_eq!(lat.index(lat.center()), vec![0, 0]);
    }
}
