//! JSON persistence for polynomials, fields, diffeomorphisms and geodesic
//! states.
//!
//! Only canonical modes (`k ≥ 0` lexicographically) are written, together
//! with the lattice header `n, d, omega, K`. Floats use the shortest decimal
//! that parses back to the same binary value, so a round trip is bit-exact.
//! Loading rejects malformed mode lists and revalidates every invariant.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{TrigPoly, VectorField};
use crate::diffeo::ApDiffeo;
use crate::error::{ApError, Result};
use crate::flows::GeodesicState;
use crate::lattice::FrequencyLattice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeJson {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub n: usize,
    pub d: usize,
    pub omega: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
    pub modes: Vec<ModeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub modes: Vec<ModeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    pub n: usize,
    pub d: usize,
    pub omega: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffeoJson {
    pub n: usize,
    pub d: usize,
    pub omega: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
    pub components: Vec<ComponentJson>,
    pub margin: f64,
    pub m_check: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub t: f64,
    pub phi: DiffeoJson,
    pub v: FieldJson,
}

fn schema(msg: impl Into<String>) -> ApError {
    ApError::Schema(msg.into())
}

fn lattice_from(n: usize, d: usize, omega: &[Vec<f64>], k: usize) -> Result<Arc<FrequencyLattice>> {
    if omega.len() != n || omega.iter().any(|r| r.len() != d) {
        return Err(schema(format!("omega must be {n} rows of length {d}")));
    }
    FrequencyLattice::new(omega, k)
        .map(Arc::new)
        .map_err(|e| schema(e.to_string()))
}

fn modes_of(p: &TrigPoly) -> Vec<ModeJson> {
    p.canonical_modes()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(k, c)| ModeJson { k, re: c.re, im: c.im })
        .collect()
}

fn poly_from_modes(lat: &Arc<FrequencyLattice>, modes: &[ModeJson]) -> Result<TrigPoly> {
    let mut seen = HashSet::new();
    let mut list = Vec::with_capacity(modes.len());
    for m in modes {
        let idx = lat
            .linear(&m.k)
            .ok_or_else(|| schema(format!("mode index {:?} is outside the lattice", m.k)))?;
        if !lat.is_canonical(idx) {
            return Err(schema(format!("mode index {:?} is not canonical", m.k)));
        }
        if !seen.insert(idx) {
            return Err(schema(format!("mode index {:?} appears twice", m.k)));
        }
        if !(m.re.is_finite() && m.im.is_finite()) {
            return Err(schema(format!("mode {:?} has a nonfinite coefficient", m.k)));
        }
        if idx == lat.center() && m.im != 0.0 {
            return Err(schema("the zero mode must be real"));
        }
        list.push((m.k.clone(), Complex64::new(m.re, m.im)));
    }
    TrigPoly::from_modes(lat, &list)
}

fn lattice_header(lat: &FrequencyLattice) -> (usize, usize, Vec<Vec<f64>>, usize) {
    (lat.n(), lat.d(), lat.omega_rows(), lat.k_max())
}

fn field_from(lat: &Arc<FrequencyLattice>, components: &[ComponentJson]) -> Result<VectorField> {
    if components.len() != lat.n() {
        return Err(schema(format!(
            "expected {} components, got {}",
            lat.n(),
            components.len()
        )));
    }
    let comps = components
        .iter()
        .map(|c| poly_from_modes(lat, &c.modes))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

impl From<&TrigPoly> for PolyJson {
    fn from(p: &TrigPoly) -> Self {
        let (n, d, omega, k) = lattice_header(p.lattice());
        Self {
            n,
            d,
            omega,
            k,
            modes: modes_of(p),
        }
    }
}

impl TryFrom<&PolyJson> for TrigPoly {
    type Error = ApError;

    fn try_from(j: &PolyJson) -> Result<Self> {
        let lat = lattice_from(j.n, j.d, &j.omega, j.k)?;
        poly_from_modes(&lat, &j.modes)
    }
}

impl From<&VectorField> for FieldJson {
    fn from(f: &VectorField) -> Self {
        let (n, d, omega, k) = lattice_header(f.lattice());
        Self {
            n,
            d,
            omega,
            k,
            components: f
                .components()
                .iter()
                .map(|c| ComponentJson { modes: modes_of(c) })
                .collect(),
        }
    }
}

impl TryFrom<&FieldJson> for VectorField {
    type Error = ApError;

    fn try_from(j: &FieldJson) -> Result<Self> {
        let lat = lattice_from(j.n, j.d, &j.omega, j.k)?;
        field_from(&lat, &j.components)
    }
}

impl From<&ApDiffeo> for DiffeoJson {
    fn from(phi: &ApDiffeo) -> Self {
        let f = FieldJson::from(phi.displacement());
        Self {
            n: f.n,
            d: f.d,
            omega: f.omega,
            k: f.k,
            components: f.components,
            margin: phi.margin(),
            m_check: phi.m_check(),
        }
    }
}

impl TryFrom<&DiffeoJson> for ApDiffeo {
    type Error = ApError;

    fn try_from(j: &DiffeoJson) -> Result<Self> {
        let lat = lattice_from(j.n, j.d, &j.omega, j.k)?;
        let f = field_from(&lat, &j.components)?;
        if !j.margin.is_finite() {
            return Err(schema("margin must be finite"));
        }
        ApDiffeo::from_parts(f, j.margin, j.m_check)
    }
}

impl From<&GeodesicState> for StateJson {
    fn from(s: &GeodesicState) -> Self {
        Self {
            t: s.t,
            phi: (&s.phi).into(),
            v: (&s.v).into(),
        }
    }
}

impl TryFrom<&StateJson> for GeodesicState {
    type Error = ApError;

    fn try_from(j: &StateJson) -> Result<Self> {
        if !j.t.is_finite() {
            return Err(schema("time must be finite"));
        }
        let phi = ApDiffeo::try_from(&j.phi)?;
        let v = VectorField::try_from(&j.v)?;
        if !phi.displacement().is_compatible(&v) {
            return Err(schema("phi and v live on different lattices"));
        }
        Ok(GeodesicState { phi, v, t: j.t })
    }
}

/// Values with a JSON representation `J`.
pub trait JsonState: Sized {
    type Json: Serialize + DeserializeOwned;

    fn to_json_repr(&self) -> Self::Json;
    fn from_json_repr(j: &Self::Json) -> Result<Self>;

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_repr()).expect("finite values serialize")
    }

    fn from_json(s: &str) -> Result<Self> {
        let j: Self::Json = serde_json::from_str(s).map_err(|e| schema(e.to_string()))?;
        Self::from_json_repr(&j)
    }
}

macro_rules! json_state {
    ($t:ty, $j:ty) => {
        impl JsonState for $t {
            type Json = $j;

            fn to_json_repr(&self) -> $j {
                self.into()
            }

            fn from_json_repr(j: &$j) -> Result<Self> {
                j.try_into()
            }
        }
    };
}

json_state!(TrigPoly, PolyJson);
json_state!(VectorField, FieldJson);
json_state!(ApDiffeo, DiffeoJson);
json_state!(GeodesicState, StateJson);

pub fn save_state<T: JsonState>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, value.to_json()).map_err(|e| ApError::Io(format!("{}: {e}", path.display())))
}

pub fn load_state<T: JsonState>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| ApError::Io(format!("{}: {e}", path.display())))?;
    T::from_json(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::make_diffeo;
    use rand::{Rng, SeedableRng};

    fn lat() -> Arc<FrequencyLattice> {
        Arc::new(FrequencyLattice::one_dim(&[1.0, 2f64.sqrt()], 4).unwrap())
    }

    fn random_poly(l: &Arc<FrequencyLattice>, seed: u64, amp: f64) -> TrigPoly {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..l.len())
            .map(|_| Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
            .collect();
        TrigPoly::from_coeffs(l, coeffs).unwrap()
    }

    fn bits(p: &TrigPoly) -> Vec<(u64, u64)> {
        p.coeffs().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect()
    }

    #[test]
    fn polynomial_roundtrip_is_bit_exact() {
        let l = lat();
        for seed in 0..20 {
            let p = random_poly(&l, seed, 1.0);
            let back = TrigPoly::from_json(&p.to_json()).unwrap();
            assert_eq!(bits(&back), bits(&p));
        }
    }

    #[test]
    fn schema_header() {
        let p = TrigPoly::cos_mode(&lat(), &[1, 0], 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["d"], 2);
        assert_eq!(v["K"], 4);
        assert_eq!(v["modes"].as_array().unwrap().len(), 1);
        assert_eq!(v["modes"][0]["re"], 0.5);
    }

    #[test]
    fn corrupt_modes_are_schema_errors() {
        let p = TrigPoly::cos_mode(&lat(), &[1, 0], 1.0).unwrap();
        let mut j = p.to_json_repr();
        type Corrupt = Box<dyn Fn(&mut PolyJson)>;
        let cases: Vec<Corrupt> = vec![
            Box::new(|j| j.modes[0].k = vec![-1, 0]),
            Box::new(|j| j.modes[0].k = vec![9, 0]),
            Box::new(|j| j.modes[0].k = vec![1]),
            Box::new(|j| j.modes.push(j.modes[0].clone())),
            Box::new(|j| {
                j.modes.push(ModeJson {
                    k: vec![0, 0],
                    re: 1.0,
                    im: 0.5,
                })
            }),
            Box::new(|j| j.omega = vec![vec![1.0]]),
        ];
        for (i, corrupt) in cases.iter().enumerate() {
            let mut bad = j.clone();
            corrupt(&mut bad);
            let s = serde_json::to_string(&bad).unwrap();
            assert!(matches!(TrigPoly::from_json(&s), Err(ApError::Schema(_))), "case {i}");
        }
        j.modes[0].re = 2.0;
        assert!(TrigPoly::try_from(&j).is_ok());
        assert!(matches!(TrigPoly::from_json("{\"n\": 1}"), Err(ApError::Schema(_))));
    }

    #[test]
    fn field_and_diffeo_roundtrip() {
        let l = Arc::new(FrequencyLattice::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 3).unwrap());
        let f = VectorField::new(vec![random_poly(&l, 1, 0.01), random_poly(&l, 2, 0.01)]).unwrap();
        let back = VectorField::from_json(&f.to_json()).unwrap();
        assert_eq!(back.max_coeff_diff(&f).unwrap(), 0.0);
        let phi = make_diffeo(f, 0.1, 28).unwrap();
        let s = phi.to_json();
        let back = ApDiffeo::from_json(&s).unwrap();
        assert_eq!(back.margin(), phi.margin());
        assert_eq!(back.m_check(), 28);
    }

    #[test]
    fn stale_margin_is_an_invariant_error() {
        let l = lat();
        let f = VectorField::scalar(TrigPoly::sin_mode(&l, &[1, 0], 0.5).unwrap()).unwrap();
        let phi = make_diffeo(f, 0.0, 36).unwrap();
        let mut j = phi.to_json_repr();
        j.margin += 0.1;
        let s = serde_json::to_string(&j).unwrap();
        assert!(matches!(ApDiffeo::from_json(&s), Err(ApError::Invariant(_))));
    }

    #[test]
    fn state_checkpoint_through_a_file() {
        let l = lat();
        let v = VectorField::scalar(random_poly(&l, 5, 0.05)).unwrap();
        let phi = make_diffeo(VectorField::scalar(random_poly(&l, 6, 0.01)).unwrap(), 0.0, 36).unwrap();
        let s = GeodesicState { phi, v, t: 0.375 };
        let dir = std::env::temp_dir().join(format!("apdiff-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.json");
        save_state(&path, &s).unwrap();
        let back: GeodesicState = load_state(&path).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(back.t, 0.375);
        assert_eq!(back.v.max_coeff_diff(&s.v).unwrap(), 0.0);
        assert_eq!(back.phi.displacement().max_coeff_diff(s.phi.displacement()).unwrap(), 0.0);
        assert!(matches!(
            load_state::<GeodesicState>(dir.join("missing.json")),
            Err(ApError::Io(_))
        ));
    }
}
