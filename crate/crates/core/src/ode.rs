//! Adaptive Dormand–Prince 5(4) integration for small complex systems.
//!
//! The Riccati slopes are scalar complex ODEs (optionally augmented with a
//! running integral), so the state is a fixed-size array. Integration lands
//! exactly on every requested output point by clipping the final step of each
//! segment. Step-size control is the standard PI-free elementary controller
//! with deterministic constants; there is no randomness and no reliance on
//! wall-clock state, so repeated runs are bit-identical.

use num_complex::Complex64;

use crate::error::DichotomyError;

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up guard on the state magnitude.
    pub max_norm: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_norm: 1e8,
        }
    }
}

// Dormand–Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂ (5th minus embedded 4th order weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrate y' = f(t, y) along `path`, returning the state at every path
/// point (the first entry is `y0` itself). The path must be strictly
/// monotone; direction is inferred from it.
pub fn integrate_path<const N: usize, F>(
    f: &F,
    y0: [Complex64; N],
    path: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[Complex64; N]>, DichotomyError>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    assert!(path.len() >= 2, "path needs at least two points");
    let increasing = path[1] > path[0];
    assert!(
        path.windows(2).all(|w| (w[1] > w[0]) == increasing && w[1] != w[0]),
        "path must be strictly monotone"
    );

    let mut out = Vec::with_capacity(path.len());
    out.push(y0);
    let mut y = y0;
    let mut t = path[0];
    let span = (path[path.len() - 1] - path[0]).abs();
    let dir = if increasing { 1.0 } else { -1.0 };
    let mut h = dir * (0.01 * span).min(0.1).max(1e-8);
    let mut k1 = f(t, &y);

    for &target in &path[1..] {
        loop {
            let remaining = target - t;
            if remaining.abs() <= 1e-14 * t.abs().max(1.0) {
                break;
            }
            if h.abs() > remaining.abs() {
                h = remaining;
            }
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(DichotomyError::StepUnderflow { r: t });
            }

            // Stage evaluations.
            let mut yt = [Complex64::default(); N];
            for i in 0..N {
                yt[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = f(t + C2 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(t + C3 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(t + C4 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(t + C5 * h, &yt);
            for i in 0..N {
                yt[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = f(t + h, &yt);
            let mut y5 = [Complex64::default(); N];
            for i in 0..N {
                y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            let k7 = f(t + h, &y5);

            // Error estimate against the embedded 4th-order solution.
            let mut err_sq = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / N as f64).sqrt();

            if err <= 1.0 {
                t += h;
                y = y5;
                k1 = k7; // first-same-as-last
                for yi in &y {
                    if !yi.re.is_finite() || !yi.im.is_finite() || yi.norm() > opts.max_norm {
                        return Err(DichotomyError::BlowUp {
                            r: t,
                            cap: opts.max_norm,
                        });
                    }
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        }
        t = target;
        out.push(y);
    }
    Ok(out)
}
