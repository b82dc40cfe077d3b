//! Text serialization of coefficient fields and symbol tables.
//!
//! Floats are written in Rust's shortest round-trip form, so write → parse
//! reproduces every value bit-exactly. CSV is the bare data plane (the
//! sphere/fiber metadata travels separately, e.g. in the run config); the
//! JSON form is self-describing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harmonics::{BasisTag, SphereSpec, SpectralField};
use crate::symbols::SymbolSample;

/// CSV with header `k,j,l,re,im`, one row per coefficient, in storage order.
pub fn field_to_csv(field: &SpectralField) -> String {
    let mut out = String::from("k,j,l,re,im\n");
    let d = field.fiber_dim();
    for (k, _mu, j, pair) in field.pairs() {
        for ell in 0..d {
            let c = pair[ell];
            out.push_str(&format!("{k},{j},{ell},{},{}\n", c.re, c.im));
        }
    }
    out
}

/// Parse a field CSV against known metadata; every (k, j, l) index below the
/// truncation must appear exactly once.
pub fn field_from_csv(
    s: &str,
    sphere: SphereSpec,
    d: usize,
    basis: BasisTag,
) -> Result<SpectralField, String> {
    let mut field = SpectralField::zeros(sphere, d, basis);
    let mut seen = vec![false; field.coeffs().len()];
    let mut lines = s.lines();
    match lines.next() {
        Some(h) if h.trim() == "k,j,l,re,im" => {}
        other => return Err(format!("bad or missing header: {other:?}")),
    }
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(format!("line {}: expected 5 fields", lineno + 2));
        }
        let k: u32 = parts[0].parse().map_err(|e| format!("line {}: k: {e}", lineno + 2))?;
        let j: usize = parts[1].parse().map_err(|e| format!("line {}: j: {e}", lineno + 2))?;
        let l: usize = parts[2].parse().map_err(|e| format!("line {}: l: {e}", lineno + 2))?;
        let re: f64 = parts[3].parse().map_err(|e| format!("line {}: re: {e}", lineno + 2))?;
        let im: f64 = parts[4].parse().map_err(|e| format!("line {}: im: {e}", lineno + 2))?;
        if k > sphere.k_max || l >= d {
            return Err(format!("line {}: index out of range", lineno + 2));
        }
        let mult = crate::harmonics::mode_multiplicity(k, sphere.n) as usize;
        if j >= mult {
            return Err(format!("line {}: multiplicity index out of range", lineno + 2));
        }
        let idx = field.flat_index(k, j, l);
        if seen[idx] {
            return Err(format!("line {}: duplicate index ({k},{j},{l})", lineno + 2));
        }
        seen[idx] = true;
        field.set_coeff(k, j, l, Complex64::new(re, im));
    }
    if !seen.iter().all(|&s| s) {
        return Err("incomplete field: some coefficients missing".into());
    }
    Ok(field)
}

/// Self-describing JSON form of a field.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    pub sphere: SphereSpec,
    pub d: usize,
    pub basis: BasisTag,
    /// Rows [k, j, l, re, im] in storage order.
    pub coeffs: Vec<(u32, usize, usize, f64, f64)>,
}

pub fn field_to_json(field: &SpectralField) -> String {
    let d = field.fiber_dim();
    let mut coeffs = Vec::with_capacity(field.coeffs().len());
    for (k, _mu, j, pair) in field.pairs() {
        for ell in 0..d {
            coeffs.push((k, j, ell, pair[ell].re, pair[ell].im));
        }
    }
    let doc = FieldJson {
        sphere: field.sphere(),
        d,
        basis: field.basis(),
        coeffs,
    };
    serde_json::to_string_pretty(&doc).expect("field serialization cannot fail")
}

pub fn field_from_json(s: &str) -> Result<SpectralField, String> {
    let doc: FieldJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
    let mut field = SpectralField::zeros(doc.sphere, doc.d, doc.basis);
    let expected = field.coeffs().len();
    if doc.coeffs.len() != expected {
        return Err(format!(
            "coefficient count {} does not match sphere/fiber ({expected})",
            doc.coeffs.len()
        ));
    }
    for &(k, j, l, re, im) in &doc.coeffs {
        field.set_coeff(k, j, l, Complex64::new(re, im));
    }
    Ok(field)
}

/// CSV with header `r,gamma_re,gamma_im,dgamma_re,dgamma_im`.
pub fn symbol_sample_to_csv(s: &SymbolSample) -> String {
    let mut out = String::from("r,gamma_re,gamma_im,dgamma_re,dgamma_im\n");
    for i in 0..s.r_grid.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.r_grid[i], s.gamma[i].re, s.gamma[i].im, s.dgamma[i].re, s.dgamma[i].im
        ));
    }
    out
}
