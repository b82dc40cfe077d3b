//! The scalar symbol calculus.
//!
//! On the mode (k, ℓ) the operator A(r) = V∞ − r⁻²Δ_{S^{n−1}} acts as
//! multiplication by λ_ℓ + μ_k/r², and its square root as multiplication by
//! the principal branch
//!
//!   γ_{kℓ}(r) = (λ_ℓ + μ_k/r²)^{1/2},   Re γ ≥ 0,  cut on (−∞, 0].
//!
//! Everything downstream leans on three facts about γ: the algebraic identity
//! γ² = λ + μ/r², the derivative ∂_r γ = −μ/(r³γ), and the lower bound
//! Re γ(r) ≥ Re √λ uniformly in μ and r. μ is accepted as an arbitrary
//! nonnegative real, not only an exact Laplace–Beltrami eigenvalue, so the
//! sampling lab can probe the estimates continuously.

use num_complex::Complex64;

use crate::error::SymbolError;
use crate::par::{map_indexed, ExecMode};
use crate::quad;
use crate::spectral::EigenData;

/// Default absolute tolerance for ∫γ.
pub const INTEGRAL_ABS_TOL: f64 = 1e-10;

/// Relative guard band around the branch cut (−∞, 0].
const CUT_TOL: f64 = 1e-14;

fn off_cut(w: Complex64) -> Result<Complex64, SymbolError> {
    let scale = w.norm().max(1.0);
    if w.im.abs() <= CUT_TOL * scale && w.re <= CUT_TOL * scale {
        return Err(SymbolError::BranchCut { value: w });
    }
    Ok(w)
}

/// γ(λ, μ, r) on the principal branch.
pub fn gamma(lambda: Complex64, mu: f64, r: f64) -> Result<Complex64, SymbolError> {
    debug_assert!(mu >= 0.0, "mu must be nonnegative");
    debug_assert!(r >= 1.0, "radius must be at least 1");
    let w = off_cut(lambda + mu / (r * r))?;
    Ok(w.sqrt())
}

/// ∂_r γ = −μ/(r³ γ).
pub fn dgamma(lambda: Complex64, mu: f64, r: f64) -> Result<Complex64, SymbolError> {
    let g = gamma(lambda, mu, r)?;
    Ok(-mu / (r * r * r) / g)
}

/// Re √λ — the uniform lower bound for Re γ(λ, μ, r) over all μ ≥ 0, r ≥ 1.
pub fn gamma_real_lower_bound(lambda: Complex64) -> Result<f64, SymbolError> {
    let w = off_cut(lambda)?;
    Ok(w.sqrt().re)
}

/// ∫_{r_from}^{r_to} γ(λ, μ, s) ds by adaptive quadrature (absolute
/// tolerance [`INTEGRAL_ABS_TOL`]).
pub fn integrate_gamma(
    lambda: Complex64,
    mu: f64,
    r_from: f64,
    r_to: f64,
) -> Result<Complex64, SymbolError> {
    assert!(
        1.0 <= r_from && r_from <= r_to,
        "need 1 <= r_from <= r_to, got [{r_from}, {r_to}]"
    );
    let f = |s: f64| gamma(lambda, mu, s);
    let (value, _err) = quad::integrate(&f, r_from, r_to, INTEGRAL_ABS_TOL)?;
    Ok(value)
}

/// Apply A_k(r)^{1/2} = R·diag(γ_{k1}(r), …, γ_{kd}(r))·R⁻¹ to a vector.
pub fn sqrt_a_apply(
    eig: &EigenData,
    mu: f64,
    r: f64,
    v: &[Complex64],
) -> Result<Vec<Complex64>, SymbolError> {
    let d = eig.dim();
    assert_eq!(v.len(), d, "vector length must match fiber dimension");
    let mut hat = eig.r_inv().matvec(v);
    for (ell, h) in hat.iter_mut().enumerate() {
        *h *= gamma(eig.lambdas()[ell], mu, r)?;
    }
    Ok(eig.r_mat().matvec(&hat))
}

/// γ and ∂_rγ tabulated over an r-grid for one (λ, μ).
#[derive(Debug, Clone)]
pub struct SymbolSample {
    pub lambda: Complex64,
    pub mu: f64,
    pub r_grid: Vec<f64>,
    pub gamma: Vec<Complex64>,
    pub dgamma: Vec<Complex64>,
}

impl SymbolSample {
    /// Evaluate over a strictly increasing grid of radii ≥ 1.
    pub fn compute(
        lambda: Complex64,
        mu: f64,
        r_grid: Vec<f64>,
        mode: ExecMode,
    ) -> Result<Self, SymbolError> {
        assert!(
            r_grid.windows(2).all(|w| w[0] < w[1]),
            "r grid must be strictly increasing"
        );
        assert!(r_grid.first().map_or(true, |&r| r >= 1.0), "radii must be >= 1");
        let results = map_indexed(mode, r_grid.len(), |i| {
            let r = r_grid[i];
            gamma(lambda, mu, r).and_then(|g| Ok((g, dgamma(lambda, mu, r)?)))
        });
        let mut gam = Vec::with_capacity(r_grid.len());
        let mut dg = Vec::with_capacity(r_grid.len());
        for res in results {
            let (g, d) = res?;
            gam.push(g);
            dg.push(d);
        }
        Ok(SymbolSample {
            lambda,
            mu,
            r_grid,
            gamma: gam,
            dgamma: dg,
        })
    }
}
