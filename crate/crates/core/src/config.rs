//! Run configuration: JSON ingestion of the sphere parameters, the potential
//! V∞, tolerances, and output options. Unknown fields are rejected so a typo
//! in a config never silently changes a run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harmonics::SphereSpec;
use crate::ode::OdeOptions;
use crate::spectral::PotentialMatrix;
use crate::zmat::ZMat;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sphere: SphereSpec,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
}

/// V∞ as `{"d": 2, "V": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub d: usize,
    #[serde(rename = "V")]
    pub v: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub cond_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            cond_cap: 1e12,
        }
    }
}

impl Tolerances {
    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.ode_rtol,
            atol: self.ode_atol,
            ..OdeOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.sphere.n < 2 {
            return Err("sphere.n must be at least 2".into());
        }
        let d = self.potential.d;
        if d == 0 {
            return Err("potential.d must be at least 1".into());
        }
        if self.potential.v.len() != d {
            return Err(format!("potential.V must have {d} rows"));
        }
        for (i, row) in self.potential.v.iter().enumerate() {
            if row.len() != d {
                return Err(format!("potential.V row {i} must have {d} entries"));
            }
            for (j, e) in row.iter().enumerate() {
                if !(e[0].is_finite() && e[1].is_finite()) {
                    return Err(format!("potential.V[{i}][{j}] is not finite"));
                }
            }
        }
        let t = &self.tolerances;
        if !(t.ode_rtol > 0.0 && t.ode_atol > 0.0 && t.cond_cap > 1.0) {
            return Err("tolerances must be positive (cond_cap > 1)".into());
        }
        Ok(())
    }

    pub fn potential_matrix(&self) -> PotentialMatrix {
        let d = self.potential.d;
        let mut m = ZMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let e = self.potential.v[i][j];
                m[(i, j)] = Complex64::new(e[0], e[1]);
            }
        }
        PotentialMatrix::new(m).expect("validated potential")
    }
}
