//! Modified Bessel function of the second kind, K_ν(x), for real order ν ≥ 0
//! and real argument x > 0.
//!
//! The radial equation u″ = (λ + μ/r²)u has decaying solution
//! √r·K_ν(√λ·r) with ν = (μ + 1/4)^{1/2}, so K_ν supplies closed-form ground
//! truth for the propagation machinery. The test suite leans on it as an
//! independent reference; nothing in the dichotomy construction calls it.
//!
//! Evaluation follows the classical split: Temme's series below x = 2 and a
//! Steed-type continued fraction above, both for the scaled value e^x·K_μ(x)
//! with |μ| ≤ 1/2, then stable forward recurrence in the order.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 20_000;

// Lanczos (g = 7, n = 9) coefficients for ln Γ.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(z) for z > 0.
fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ₁(μ) = [1/Γ(1−μ) − 1/Γ(1+μ)]/(2μ) and Γ₂(μ) = [1/Γ(1−μ) + 1/Γ(1+μ)]/2,
/// with the μ → 0 limits Γ₁ → −γ_E, Γ₂ → 1.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let gp = (-ln_gamma(1.0 + mu)).exp(); // 1/Γ(1+μ)
    let gm = (-ln_gamma(1.0 - mu)).exp(); // 1/Γ(1−μ)
    let g1 = if mu.abs() < 1e-5 {
        -EULER_GAMMA
    } else {
        (gm - gp) / (2.0 * mu)
    };
    let g2 = 0.5 * (gm + gp);
    (g1, g2)
}

/// Temme series for (e^x K_μ(x), e^x K_{μ+1}(x)), valid for |μ| ≤ 1/2, 0 < x ≤ 2.
fn k_temme_scaled(mu: f64, x: f64) -> (f64, f64) {
    debug_assert!(mu.abs() <= 0.5 + 1e-12 && x > 0.0 && x <= 2.0);
    let half_x = 0.5 * x;
    let ln_half_x = half_x.ln();
    let sigma = -mu * ln_half_x;
    let pi_mu = std::f64::consts::PI * mu;
    let sinrat = if pi_mu.abs() < 1e-14 { 1.0 } else { pi_mu / pi_mu.sin() };
    let sinhrat = if sigma.abs() < 1e-14 { 1.0 } else { sigma.sinh() / sigma };
    let (g1, g2) = temme_gammas(mu);

    let mut f = sinrat * (sigma.cosh() * g1 - sinhrat * ln_half_x * g2);
    // p_0 = ½(x/2)^{−μ}Γ(1+μ), q_0 = ½(x/2)^{μ}Γ(1−μ), h_0 = p_0.
    let mut p = 0.5 * (-mu * ln_half_x + ln_gamma(1.0 + mu)).exp();
    let mut q = 0.5 * (mu * ln_half_x + ln_gamma(1.0 - mu)).exp();
    let xx = half_x * half_x;
    let mut c = 1.0f64;
    let mut sum0 = f;
    let mut sum1 = p;
    let mut k = 0usize;
    while k < MAX_ITER {
        k += 1;
        let kk = k as f64;
        f = (kk * f + p + q) / (kk * kk - mu * mu);
        p /= kk - mu;
        q /= kk + mu;
        let h = -kk * f + p;
        c *= xx / kk;
        let del0 = c * f;
        let del1 = c * h;
        sum0 += del0;
        sum1 += del1;
        if del0.abs() < 0.5 * sum0.abs() * f64::EPSILON {
            break;
        }
    }
    let ex = x.exp();
    (sum0 * ex, sum1 * 2.0 / x * ex)
}

/// Steed continued fraction for (e^x K_μ(x), e^x K_{μ+1}(x)), |μ| ≤ 1/2, x > 2.
fn k_cf2_scaled(mu: f64, x: f64) -> (f64, f64) {
    debug_assert!(mu.abs() <= 0.5 + 1e-12 && x > 2.0);
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0f64;
    let mut q2 = 1.0f64;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    h *= a1;
    let k_mu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k_mup1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mup1)
}

/// e^x·K_ν(x) for ν ≥ 0, x > 0.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "argument must be positive");
    assert!(nu >= 0.0, "order must be nonnegative (K is even in its order)");
    let steps = (nu + 0.5).floor() as i64;
    let mu = nu - steps as f64; // |μ| ≤ 1/2
    let (k_mu, k_mup1) = if x <= 2.0 {
        k_temme_scaled(mu, x)
    } else {
        k_cf2_scaled(mu, x)
    };
    let mut k_prev = k_mu;
    let mut k_cur = k_mup1;
    if steps == 0 {
        return k_prev;
    }
    // Forward recurrence K_{m+1} = (2m/x)K_m + K_{m-1}, stable upward.
    for n in 1..steps {
        let order = mu + n as f64;
        let next = 2.0 * order / x * k_cur + k_prev;
        k_prev = k_cur;
        k_cur = next;
    }
    k_cur
}

/// K_ν(x).
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// Logarithmic slope of the decaying radial profile √r·K_ν(κ r):
/// m(r) = −u′(r)/u(r) = κ·K_{ν+1}(κr)/K_ν(κr) − ν/r − 1/(2r).
pub fn radial_decay_slope(nu: f64, kappa: f64, r: f64) -> f64 {
    let x = kappa * r;
    let ratio = bessel_k_scaled(nu + 1.0, x) / bessel_k_scaled(nu, x);
    kappa * ratio - nu / r - 0.5 / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use num_complex::Complex64;

    fn k_half_closed(x: f64) -> f64 {
        (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp()
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.3, 0.9, 1.7, 2.0, 2.3, 5.0, 12.0] {
            let k12 = bessel_k(0.5, x);
            assert!(
                (k12 - k_half_closed(x)).abs() < 1e-12 * k_half_closed(x).max(1e-300),
                "K_1/2({x})"
            );
            let k32 = bessel_k(1.5, x);
            let expect = k_half_closed(x) * (1.0 + 1.0 / x);
            assert!((k32 - expect).abs() < 1e-12 * expect, "K_3/2({x})");
            let k52 = bessel_k(2.5, x);
            let expect = k_half_closed(x) * (1.0 + 3.0 / x + 3.0 / (x * x));
            assert!((k52 - expect).abs() < 1e-12 * expect, "K_5/2({x})");
        }
    }

    #[test]
    fn integral_representation_cross_check() {
        // e^x·K_ν(x) = ∫_0^∞ exp(x − x cosh t) cosh(ν t) dt; the integrand is
        // below 1e-300 well before t = 12 for x ≥ 1.
        for &(nu, x) in &[
            (0.0, 1.0),
            (0.118033988749895, 1.3),
            (1.118033988749895, 1.0),
            (1.118033988749895, 3.0),
            (2.5, 1.9),
            (2.5, 2.1),
            (3.7, 8.0),
            (0.5, 25.0),
        ] {
            let f = |t: f64| -> Result<Complex64, crate::error::SymbolError> {
                Ok(Complex64::new((x - x * t.cosh()).exp() * (nu * t).cosh(), 0.0))
            };
            let (val, _) = quad::integrate(&f, 0.0, 12.0, 1e-13).unwrap();
            let got = bessel_k_scaled(nu, x);
            assert!(
                (got - val.re).abs() <= 1e-11 * val.re.abs(),
                "K_{nu}({x}): series/cf {got:.16e} vs integral {:.16e}",
                val.re
            );
        }
    }

    #[test]
    fn branch_seam_is_continuous() {
        for &nu in &[0.0, 0.3, 1.118033988749895, 2.5, 4.2] {
            let below = bessel_k_scaled(nu, 2.0);
            let above = bessel_k_scaled(nu, 2.0 + 1e-9);
            assert!(
                (below - above).abs() < 1e-7 * below,
                "seam jump for nu={nu}: {below} vs {above}"
            );
        }
    }

    #[test]
    fn decay_slope_constant_coefficient_limit() {
        // μ = 0 means ν = 1/2 and u = √r·K_{1/2}(κr) ∝ e^{−κr}: slope is κ.
        for &(kappa, r) in &[(1.0, 1.0), (2.0, 3.0), (0.7, 10.0)] {
            let m = radial_decay_slope(0.5, kappa, r);
            assert!((m - kappa).abs() < 1e-12, "slope {m} vs {kappa}");
        }
    }
}
