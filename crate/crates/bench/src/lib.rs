//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use num_complex::Complex64;
use apdiff_core::{make_diffeo, ApDiffeo, FrequencyLattice, SolverConfig, TrigPoly, VectorField};

/// `Ω = [1, √2]` truncated at `K`.
pub fn lattice(k: usize) -> Arc<FrequencyLattice> {
    Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], k).expect("lattice"))
}

/// A smooth polynomial with geometric decay `0.6^|k|_∞`, scaled to l1 mass `amp`.
pub fn smooth_poly(l: &Arc<FrequencyLattice>, amp: f64) -> TrigPoly {
    let modes: Vec<_> = (l.center() + 1..l.len())
        .map(|i| {
            let k = l.index(i);
            let w = 0.6f64.powi(l.sup_index(i) as i32);
            let phase = (i as f64 * 0.37).sin();
            (k, Complex64::new(w * phase.cos(), w * phase))
        })
        .collect();
    let p = TrigPoly::from_modes(l, &modes).expect("modes in lattice");
    p.scaled(amp / p.l1_mass())
}

/// Displacement supported on `|k|_∞ ≤ 2` with l1 mass `amp`; its inverse is
/// resolved to ~1e-10 once `K ≥ 12`.
pub fn diffeo(l: &Arc<FrequencyLattice>, amp: f64) -> ApDiffeo {
    let modes: Vec<_> = (l.center() + 1..l.len())
        .filter(|&i| l.sup_index(i) <= 2)
        .map(|i| (l.index(i), Complex64::from_polar(1.0, i as f64)))
        .collect();
    let p = TrigPoly::from_modes(l, &modes).expect("modes in lattice");
    let f = VectorField::scalar(p.scaled(amp / p.l1_mass())).expect("scalar field");
    make_diffeo(f, 0.0, 4 * l.side()).expect("small displacement")
}

pub fn solver(l: &FrequencyLattice) -> SolverConfig {
    SolverConfig::for_lattice(l).with_grid(64).with_dt(1e-3)
}

/// `a·(cos x + ½ cos √2x)`.
pub fn velocity(l: &Arc<FrequencyLattice>, a: f64) -> VectorField {
    let p = TrigPoly::cos_mode(l, &[1, 0], a)
        .and_then(|c| c.add(&TrigPoly::cos_mode(l, &[0, 1], 0.5 * a)?))
        .expect("modes in lattice");
    VectorField::scalar(p).expect("scalar field")
}
