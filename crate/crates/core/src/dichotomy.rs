//! Desk-scale realization of the exponential dichotomy.
//!
//! On each mode (k, ℓ) the radial equation u″ = (λ_ℓ + μ_k/r²)u splits into a
//! decaying and a growing direction. The decaying solution's logarithmic
//! slope m(r) = −u′/u obeys the Riccati equation m′ = m² − γ², and is
//! recovered by backward continuation from a frozen-coefficient far-field
//! seed m(r_max) = γ(r_max); the backward flow contracts onto the stable
//! branch exponentially, so the seeding error never reaches the radii of
//! interest. The growing solution's slope m̃ obeys m̃′ = γ² − m̃² and is
//! continued forward from the inner radius. Propagators multiply modes by
//! exp(−∫m), projections split phase space along the two slope fields, and a
//! least-squares fit over measured propagator norms extracts the decay
//! constants (K, η), whose rate floor is min_ℓ Re √λ_ℓ.

use num_complex::Complex64;

use crate::error::DichotomyError;
use crate::harmonics::{BasisTag, SpectralField};
use crate::ode::{integrate_path, OdeOptions};
use crate::par::{map_indexed, ExecMode};
use crate::spectral::EigenData;
use crate::symbols::gamma;
use crate::zmat::ZMat;

/// Inner radius of the exterior domain; unstable slopes are seeded here.
pub const DOMAIN_FLOOR: f64 = 1.0;

/// Far-field horizon for backward Riccati continuation: far enough out that
/// the frozen-coefficient seed has fully relaxed before the radii of
/// interest.
pub fn default_horizon(lambda: Complex64, mu: f64, r_last: f64) -> f64 {
    r_last + (10.0 * mu.sqrt() / lambda.norm().sqrt()).max(20.0)
}

/// Stable logarithmic slope m(r) on a grid, from backward continuation.
#[derive(Debug, Clone)]
pub struct RiccatiSlope {
    pub lambda: Complex64,
    pub mu: f64,
    pub r_grid: Vec<f64>,
    pub m: Vec<Complex64>,
}

fn riccati_rhs(lambda: Complex64, mu: f64) -> impl Fn(f64, &[Complex64; 1]) -> [Complex64; 1] {
    move |r, y| {
        let gamma_sq = lambda + mu / (r * r);
        [y[0] * y[0] - gamma_sq]
    }
}

/// Backward continuation of the stable slope from `r_max` onto `r_grid`
/// (strictly increasing, all ≥ 1, all ≤ r_max).
pub fn riccati_slope(
    lambda: Complex64,
    mu: f64,
    r_grid: &[f64],
    r_max: f64,
    opts: &OdeOptions,
) -> Result<RiccatiSlope, DichotomyError> {
    assert!(!r_grid.is_empty(), "empty radius grid");
    assert!(
        r_grid.windows(2).all(|w| w[0] < w[1]) && r_grid[0] >= 1.0,
        "grid must be strictly increasing with radii >= 1"
    );
    let r_last = *r_grid.last().unwrap();
    if r_max < r_last {
        return Err(DichotomyError::HorizonTooShort { r_max, r_last });
    }
    let seed = gamma(lambda, mu, r_max).map_err(DichotomyError::Symbol)?;

    // Path: horizon down through the grid in reverse.
    let mut path = Vec::with_capacity(r_grid.len() + 1);
    path.push(r_max);
    for &r in r_grid.iter().rev() {
        if r < r_max {
            path.push(r);
        }
    }
    if path.len() == 1 {
        // The only grid point sits exactly at the horizon.
        return Ok(RiccatiSlope {
            lambda,
            mu,
            r_grid: r_grid.to_vec(),
            m: vec![seed],
        });
    }
    let states = integrate_path(&riccati_rhs(lambda, mu), [seed], &path, opts)?;

    // Map states back to ascending grid order.
    let mut m = vec![Complex64::default(); r_grid.len()];
    if r_last == r_max {
        m[r_grid.len() - 1] = seed;
    }
    for (pi, &p) in path.iter().enumerate().skip(1) {
        let gi = r_grid.iter().rposition(|&r| r == p).expect("path point from grid");
        m[gi] = states[pi][0];
    }
    Ok(RiccatiSlope {
        lambda,
        mu,
        r_grid: r_grid.to_vec(),
        m,
    })
}

/// Stable propagation factor exp(−∫_{r_from}^{r_to} m ds) for one mode,
/// together with the slopes at both ends. Requires r_to ≥ r_from ≥ 1.
pub fn stable_factor(
    lambda: Complex64,
    mu: f64,
    r_from: f64,
    r_to: f64,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64, Complex64), DichotomyError> {
    assert!(1.0 <= r_from && r_from <= r_to, "need 1 <= r_from <= r_to");
    let horizon = default_horizon(lambda, mu, r_to);
    let seed = gamma(lambda, mu, horizon).map_err(DichotomyError::Symbol)?;
    // Leg 1: relax the seed from the horizon down to r_to.
    let states = integrate_path(&riccati_rhs(lambda, mu), [seed], &[horizon, r_to], opts)?;
    let m_to = states[1][0];
    if r_from == r_to {
        return Ok((Complex64::new(1.0, 0.0), m_to, m_to));
    }
    // Leg 2: continue to r_from with the running integral I' = m, I(r_to) = 0;
    // then ∫_{r_from}^{r_to} m = −I(r_from).
    let rhs = move |r: f64, y: &[Complex64; 2]| {
        let gamma_sq = lambda + mu / (r * r);
        [y[0] * y[0] - gamma_sq, y[0]]
    };
    let states = integrate_path(&rhs, [m_to, Complex64::default()], &[r_to, r_from], opts)?;
    let m_from = states[1][0];
    let integral = -states[1][1];
    Ok(((-integral).exp(), m_from, m_to))
}

/// Stable slope m at a single radius, relaxed backward from the default
/// horizon.
pub fn stable_slope_at(
    lambda: Complex64,
    mu: f64,
    r: f64,
    opts: &OdeOptions,
) -> Result<Complex64, DichotomyError> {
    assert!(r >= 1.0);
    let horizon = default_horizon(lambda, mu, r);
    let seed = gamma(lambda, mu, horizon).map_err(DichotomyError::Symbol)?;
    Ok(integrate_path(&riccati_rhs(lambda, mu), [seed], &[horizon, r], opts)?[1][0])
}

/// Growing-solution slope m̃ at `r`, continued forward from the seed radius
/// (frozen-coefficient seeding m̃(seed_r) = γ(seed_r)).
pub fn unstable_slope_at(
    lambda: Complex64,
    mu: f64,
    r: f64,
    seed_r: f64,
    opts: &OdeOptions,
) -> Result<Complex64, DichotomyError> {
    assert!(1.0 <= seed_r && seed_r <= r);
    let seed = gamma(lambda, mu, seed_r).map_err(DichotomyError::Symbol)?;
    if seed_r == r {
        return Ok(seed);
    }
    let rhs = move |s: f64, y: &[Complex64; 1]| {
        let gamma_sq = lambda + mu / (s * s);
        [gamma_sq - y[0] * y[0]]
    };
    let states = integrate_path(&rhs, [seed], &[seed_r, r], opts)?;
    Ok(states[1][0])
}

/// Unstable (inward) factor exp(−∫_{r_to}^{r_from} m̃ ds) for one mode,
/// with m̃ seeded at the inner radius r_to. Requires r_from ≥ r_to ≥ 1.
pub fn unstable_factor(
    lambda: Complex64,
    mu: f64,
    r_from: f64,
    r_to: f64,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64, Complex64), DichotomyError> {
    assert!(1.0 <= r_to && r_to <= r_from, "need 1 <= r_to <= r_from");
    let seed = gamma(lambda, mu, r_to).map_err(DichotomyError::Symbol)?;
    if r_from == r_to {
        return Ok((Complex64::new(1.0, 0.0), seed, seed));
    }
    let rhs = move |s: f64, y: &[Complex64; 2]| {
        let gamma_sq = lambda + mu / (s * s);
        [gamma_sq - y[0] * y[0], y[0]]
    };
    let states = integrate_path(&rhs, [seed, Complex64::default()], &[r_to, r_from], opts)?;
    let m_from = states[1][0];
    let integral = states[1][1]; // ∫_{r_to}^{r_from} m̃ ds
    Ok(((-integral).exp(), m_from, seed))
}

fn mode_factors(
    field: &SpectralField,
    eig: &EigenData,
    mode: ExecMode,
    factor_of: impl Fn(Complex64, f64) -> Result<Complex64, DichotomyError> + Sync + Send,
) -> Result<Vec<Complex64>, DichotomyError> {
    let d = eig.dim();
    let k_max = field.sphere().k_max;
    let n = field.sphere().n;
    let jobs = (k_max as usize + 1) * d;
    let results = map_indexed(mode, jobs, |idx| {
        let k = (idx / d) as u32;
        let ell = idx % d;
        let mu = crate::harmonics::laplace_eigenvalue(k, n);
        factor_of(eig.lambdas()[ell], mu)
    });
    results.into_iter().collect()
}

fn apply_factors(field: &SpectralField, factors: &[Complex64]) -> SpectralField {
    let d = field.fiber_dim();
    let mut out = field.clone();
    let k_max = field.sphere().k_max;
    let n = field.sphere().n;
    for k in 0..=k_max {
        let mult = crate::harmonics::mode_multiplicity(k, n) as usize;
        for j in 0..mult {
            let pair = out.pair_mut(k, j);
            for ell in 0..d {
                pair[ell] *= factors[k as usize * d + ell];
            }
        }
    }
    out
}

/// Evolve an eigen-basis field forward along the stable directions:
/// u_{kjℓ} ↦ exp(−∫_{r_from}^{r_to} m_{kℓ}) u_{kjℓ}.
pub fn stable_propagate(
    field: &SpectralField,
    eig: &EigenData,
    r_from: f64,
    r_to: f64,
    mode: ExecMode,
    opts: &OdeOptions,
) -> Result<SpectralField, DichotomyError> {
    assert!(field.basis() == BasisTag::Eigen, "field must be in the eigen basis");
    assert_eq!(field.fiber_dim(), eig.dim());
    assert!(1.0 <= r_from && r_from <= r_to);
    let factors = mode_factors(field, eig, mode, |lambda, mu| {
        Ok(stable_factor(lambda, mu, r_from, r_to, opts)?.0)
    })?;
    Ok(apply_factors(field, &factors))
}

/// Evolve an eigen-basis field inward along the unstable directions.
pub fn unstable_propagate(
    field: &SpectralField,
    eig: &EigenData,
    r_from: f64,
    r_to: f64,
    mode: ExecMode,
    opts: &OdeOptions,
) -> Result<SpectralField, DichotomyError> {
    assert!(field.basis() == BasisTag::Eigen, "field must be in the eigen basis");
    assert_eq!(field.fiber_dim(), eig.dim());
    assert!(1.0 <= r_to && r_to <= r_from);
    let factors = mode_factors(field, eig, mode, |lambda, mu| {
        Ok(unstable_factor(lambda, mu, r_from, r_to, opts)?.0)
    })?;
    Ok(apply_factors(field, &factors))
}

/// Which half of the dichotomy a propagator realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    Stable,
    Unstable,
}

/// One mode's 2×2 propagator block in (u, u′) coordinates.
#[derive(Debug, Clone)]
pub struct PropagatorBlock {
    pub mu: f64,
    pub ell: usize,
    pub mat: [[Complex64; 2]; 2],
}

impl PropagatorBlock {
    fn mul(&self, other: &PropagatorBlock) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.mat[i][0] * other.mat[0][j] + self.mat[i][1] * other.mat[1][j];
            }
        }
        out
    }

    /// Spectral norm of the 2×2 block.
    pub fn norm(&self) -> f64 {
        let m = ZMat::from_rows(&[self.mat[0].to_vec(), self.mat[1].to_vec()]);
        m.spectral_norm()
    }
}

/// Per-mode rank-one propagator matrices for the stable (outward) or
/// unstable (inward) half of the dichotomy, extended by zero on the
/// complementary subspace.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub r_from: f64,
    pub r_to: f64,
    pub kind: PropagatorKind,
    blocks: Vec<PropagatorBlock>,
}

impl Propagator {
    /// Stable propagator over the mode set `mus` (one block per (μ, ℓ)).
    pub fn stable(
        eig: &EigenData,
        mus: &[f64],
        r_from: f64,
        r_to: f64,
        opts: &OdeOptions,
    ) -> Result<Self, DichotomyError> {
        assert!(1.0 <= r_from && r_from <= r_to);
        let mut blocks = Vec::with_capacity(mus.len() * eig.dim());
        for &mu in mus {
            for (ell, &lambda) in eig.lambdas().iter().enumerate() {
                let (phi, m_from, m_to) = stable_factor(lambda, mu, r_from, r_to, opts)?;
                let mt_from = unstable_slope_at(lambda, mu, r_from, DOMAIN_FLOOR, opts)?;
                // T = φ · v(r_to) ⊗ ŵ(r_from), v = (1, −m)ᵀ, ŵ = (m̃, −1)/(m̃+m).
                let den = mt_from + m_from;
                let w = [mt_from / den, -Complex64::new(1.0, 0.0) / den];
                let v = [Complex64::new(1.0, 0.0), -m_to];
                blocks.push(PropagatorBlock {
                    mu,
                    ell,
                    mat: [[phi * v[0] * w[0], phi * v[0] * w[1]],
                          [phi * v[1] * w[0], phi * v[1] * w[1]]],
                });
            }
        }
        Ok(Propagator {
            r_from,
            r_to,
            kind: PropagatorKind::Stable,
            blocks,
        })
    }

    /// Unstable propagator over the mode set `mus`, mapping inward.
    pub fn unstable(
        eig: &EigenData,
        mus: &[f64],
        r_from: f64,
        r_to: f64,
        opts: &OdeOptions,
    ) -> Result<Self, DichotomyError> {
        assert!(1.0 <= r_to && r_to <= r_from);
        let mut blocks = Vec::with_capacity(mus.len() * eig.dim());
        for &mu in mus {
            for (ell, &lambda) in eig.lambdas().iter().enumerate() {
                let (phi, mt_from, mt_to) = unstable_factor(lambda, mu, r_from, r_to, opts)?;
                let m_from = stable_slope_at(lambda, mu, r_from, opts)?;
                // T̃ = φ̃ · ṽ(r_to) ⊗ w̃(r_from), ṽ = (1, m̃)ᵀ, w̃ = (m, 1)/(m+m̃).
                let den = m_from + mt_from;
                let w = [m_from / den, Complex64::new(1.0, 0.0) / den];
                let v = [Complex64::new(1.0, 0.0), mt_to];
                blocks.push(PropagatorBlock {
                    mu,
                    ell,
                    mat: [[phi * v[0] * w[0], phi * v[0] * w[1]],
                          [phi * v[1] * w[0], phi * v[1] * w[1]]],
                });
            }
        }
        Ok(Propagator {
            r_from,
            r_to,
            kind: PropagatorKind::Unstable,
            blocks,
        })
    }

    pub fn blocks(&self) -> &[PropagatorBlock] {
        &self.blocks
    }

    /// Composition T(self) ∘ T(earlier); radii and mode sets must chain.
    pub fn compose(&self, earlier: &Propagator) -> Propagator {
        assert_eq!(self.kind, earlier.kind, "cannot mix stable and unstable");
        assert_eq!(self.r_from, earlier.r_to, "propagators do not chain");
        assert_eq!(self.blocks.len(), earlier.blocks.len());
        let blocks = self
            .blocks
            .iter()
            .zip(earlier.blocks.iter())
            .map(|(a, b)| {
                assert!(a.mu == b.mu && a.ell == b.ell, "mode sets differ");
                PropagatorBlock {
                    mu: a.mu,
                    ell: a.ell,
                    mat: a.mul(b),
                }
            })
            .collect();
        Propagator {
            r_from: earlier.r_from,
            r_to: self.r_to,
            kind: self.kind,
            blocks,
        }
    }

    /// Largest block norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }
}

/// Decay constants in ‖T^s(r₁, r₂)‖ ≤ K e^{−η(r₁−r₂)}.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub k_const: f64,
    pub eta: f64,
}

/// Measure stable-restriction norms over radius pairs and fit the decay.
///
/// For each pair (r₁ ≥ r₂) the norm of the stable propagator restricted to
/// the stable line is |φ|·(1+|m(r₁)|²)^{1/2}/(1+|m(r₂)|²)^{1/2}, maximized
/// over the mode set. The fit is least squares of log-norm against
/// −(r₁ − r₂), with K then lifted so the bound holds on every measured pair.
pub fn measure_decay(
    eig: &EigenData,
    mus: &[f64],
    r_pairs: &[(f64, f64)],
    mode: ExecMode,
    opts: &OdeOptions,
) -> Result<DecayFit, DichotomyError> {
    if r_pairs.len() < 2 {
        return Err(DichotomyError::FitFailure("need at least two radius pairs".into()));
    }
    assert!(!mus.is_empty(), "empty mode set");
    for &(r1, r2) in r_pairs {
        assert!(r1 >= r2 && r2 >= 1.0, "pairs must satisfy r1 >= r2 >= 1");
    }

    let norms: Vec<Result<f64, DichotomyError>> = map_indexed(mode, r_pairs.len(), |i| {
        let (r1, r2) = r_pairs[i];
        let mut worst = 0.0f64;
        for &mu in mus {
            for &lambda in eig.lambdas() {
                let (phi, m2, m1) = stable_factor(lambda, mu, r2, r1, opts)?;
                let t = phi.norm()
                    * ((1.0 + m1.norm_sqr()) / (1.0 + m2.norm_sqr())).sqrt();
                worst = worst.max(t);
            }
        }
        Ok(worst)
    });

    let mut xs = Vec::with_capacity(r_pairs.len());
    let mut ys = Vec::with_capacity(r_pairs.len());
    for (i, n) in norms.into_iter().enumerate() {
        let n = n?;
        if !(n.is_finite() && n > 0.0) {
            return Err(DichotomyError::FitFailure(format!(
                "non-finite propagator norm at pair {i}"
            )));
        }
        xs.push(r_pairs[i].0 - r_pairs[i].1);
        ys.push(n.ln());
    }
    let nn = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nn;
    let my = ys.iter().sum::<f64>() / nn;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-12 {
        return Err(DichotomyError::FitFailure("degenerate separations".into()));
    }
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let eta = -sxy / sxx;
    // Lift K so the bound covers every measured pair (slack 0 at the argmax).
    let log_k = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| y + eta * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        k_const: log_k.exp().max(1.0),
        eta,
    })
}

/// Dichotomy projection P^s(r) onto the stable subspace along the unstable
/// one, as a 2d×2d matrix on (u, u′) ∈ ℂ^{2d}.
pub fn projection(
    eig: &EigenData,
    mu: f64,
    r: f64,
    opts: &OdeOptions,
) -> Result<ZMat, DichotomyError> {
    assert!(r >= 1.0);
    let d = eig.dim();
    let mut p11 = Vec::with_capacity(d);
    let mut p12 = Vec::with_capacity(d);
    let mut p21 = Vec::with_capacity(d);
    let mut p22 = Vec::with_capacity(d);
    for &lambda in eig.lambdas() {
        let m = stable_slope_at(lambda, mu, r, opts)?;
        let mt = unstable_slope_at(lambda, mu, r, DOMAIN_FLOOR, opts)?;
        // Angle between the stable line (1, −m) and unstable line (1, m̃).
        let v_dot = Complex64::new(1.0, 0.0) - m * mt.conj();
        let cosang = v_dot.norm()
            / ((1.0 + m.norm_sqr()).sqrt() * (1.0 + mt.norm_sqr()).sqrt());
        let angle = cosang.min(1.0).acos();
        if angle < 1e-6 {
            return Err(DichotomyError::IllConditionedSplit { angle });
        }
        let den = m + mt;
        p11.push(mt / den);
        p12.push(-Complex64::new(1.0, 0.0) / den);
        p21.push(-m * mt / den);
        p22.push(m / den);
    }
    // Assemble [R 0; 0 R]·blockdiag·[R⁻¹ 0; 0 R⁻¹].
    let quad = |diag: &[Complex64]| -> ZMat {
        let mut dm = ZMat::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            dm[(i, i)] = v;
        }
        eig.r_mat().mul(&dm).mul(eig.r_inv())
    };
    let q11 = quad(&p11);
    let q12 = quad(&p12);
    let q21 = quad(&p21);
    let q22 = quad(&p22);
    let mut p = ZMat::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            p[(i, j)] = q11[(i, j)];
            p[(i, j + d)] = q12[(i, j)];
            p[(i + d, j)] = q21[(i, j)];
            p[(i + d, j + d)] = q22[(i, j)];
        }
    }
    Ok(p)
}

/// The two graph-norm ratios of the isomorphism estimate, evaluated on a
/// canonical-basis field at radius r: the H¹/graph-norm ratio with constant
/// 1 + ‖V∞‖, and the L²/graph-norm ratio with constant ‖R‖²‖R⁻¹‖²/Γ².
/// Zero fields return (0, 0).
pub fn iso_check(
    field: &SpectralField,
    eig: &EigenData,
    r: f64,
) -> Result<(f64, f64), DichotomyError> {
    use crate::harmonics::NormKind;
    assert!(field.basis() == BasisTag::Canonical, "field must be canonical basis");
    let l2 = field.norm(NormKind::L2);
    if l2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let h1 = field.norm(NormKind::H1);
    let graph = field.graph_norm(eig, r).map_err(DichotomyError::Symbol)?;
    let ratio_a = (h1 * h1 / (r * r))
        / ((1.0 + eig.potential_norm()) * l2 * l2 + graph * graph);
    let rep = crate::spectral::check_hypotheses(eig);
    let ratio_b = if rep.gamma_lower > 0.0 {
        let c = eig.r_mat().spectral_norm().powi(2) * eig.r_inv().spectral_norm().powi(2)
            / (rep.gamma_lower * rep.gamma_lower);
        (l2 * l2) / (c * graph * graph)
    } else {
        f64::INFINITY
    };
    Ok((ratio_a, ratio_b))
}
