//! Norm reports for a polynomial stored as JSON.

use std::fmt::Write as _;
use std::path::Path;

use apdiff_core::holder::default_deltas;
use apdiff_core::{
    cm_norm, holder_seminorm, little_holder_profile, sup_norm, JsonState, OffsetSet, TrigPoly,
    Verdict,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct NormsRequest {
    pub m: Vec<f64>,
    pub gamma: Vec<f64>,
    pub grid: usize,
    pub uniform_offsets: Option<usize>,
    pub profile: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub quantity: &'static str,
    pub gamma_or_m: Option<f64>,
    pub grid: usize,
    pub value: f64,
    pub verdict: Option<Verdict>,
}

pub const NORMS_HEADER: &str = "quantity,gamma_or_m,grid,value,verdict";

pub fn load_poly(path: &Path) -> Result<TrigPoly, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    TrigPoly::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Sup norm, then one row per requested order `m`, seminorm exponent and
/// (optionally) little-Hölder profile.
pub fn compute_norms(f: &TrigPoly, req: &NormsRequest) -> Result<Vec<NormRow>, CliError> {
    let bad = |e: apdiff_core::ApError| CliError::Config(e.to_string());
    let offsets = match req.uniform_offsets {
        Some(count) => OffsetSet::Uniform { count },
        None => OffsetSet::default(),
    };
    let mut rows = Vec::new();
    let s = sup_norm(f.into(), req.grid).map_err(bad)?;
    rows.push(NormRow {
        quantity: "sup_norm",
        gamma_or_m: None,
        grid: s.grid,
        value: s.value,
        verdict: None,
    });
    for &m in &req.m {
        let r = cm_norm(f.into(), m, req.grid, &offsets).map_err(bad)?;
        rows.push(NormRow {
            quantity: "cm_norm",
            gamma_or_m: Some(m),
            grid: r.grid,
            value: r.value,
            verdict: None,
        });
    }
    for &g in &req.gamma {
        let r = holder_seminorm(f.into(), g, req.grid, &offsets).map_err(bad)?;
        rows.push(NormRow {
            quantity: "holder_seminorm",
            gamma_or_m: Some(g),
            grid: r.grid,
            value: r.value,
            verdict: None,
        });
        if req.profile {
            let p = little_holder_profile(f.into(), g, &default_deltas(), req.grid).map_err(bad)?;
            rows.push(NormRow {
                quantity: "little_holder_modulus",
                gamma_or_m: Some(g),
                grid: p.grid,
                value: p.points.last().map_or(0.0, |(_, w)| *w),
                verdict: Some(p.verdict),
            });
        }
    }
    Ok(rows)
}

pub fn norms_csv(rows: &[NormRow]) -> String {
    let mut s = String::from(NORMS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.quantity,
            r.gamma_or_m.map(|v| v.to_string()).unwrap_or_default(),
            r.grid,
            r.value,
            r.verdict.map(|v| v.to_string()).unwrap_or_default()
        );
    }
    s
}
