//! Property tests for the structural invariants of the symbol calculus and
//! the mode bookkeeping.

use num_complex::Complex64;
use proptest::prelude::*;
use rdich_core::harmonics::{BasisTag, NormKind, SphereSpec, SpectralField};
use rdich_core::spectral::{check_hypotheses, eigendecompose, EigenData, PotentialMatrix};
use rdich_core::symbols::{gamma, gamma_real_lower_bound};
use rdich_core::zmat::ZMat;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// λ off the cut, with a wedge margin so γ is well defined for all μ, r.
fn admissible_lambda() -> impl Strategy<Value = Complex64> {
    (0.05f64..50.0, -3.0f64..3.0)
        .prop_map(|(m, th_raw)| {
            let th = th_raw.clamp(-std::f64::consts::PI + 0.1, std::f64::consts::PI - 0.1);
            Complex64::from_polar(m, th)
        })
}

proptest! {
    /// Branch consistency: γ² = λ + μ/r² and Re γ > 0.
    #[test]
    fn gamma_branch(lambda in admissible_lambda(),
                    mu in 0.0f64..1e6,
                    r in 1.0f64..1e3) {
        let g = gamma(lambda, mu, r).unwrap();
        let target = lambda + mu / (r * r);
        prop_assert!((g * g - target).norm() <= 1e-12 * target.norm());
        prop_assert!(g.re > 0.0);
    }

    /// Re γ(λ, μ, r) ≥ Re √λ for all μ ≥ 0, r ≥ 1.
    #[test]
    fn gamma_real_part_floor(lambda in admissible_lambda(),
                             mu in 0.0f64..1e8,
                             r in 1.0f64..1e3) {
        let g = gamma(lambda, mu, r).unwrap();
        let floor = gamma_real_lower_bound(lambda).unwrap();
        prop_assert!(g.re >= floor - 1e-12 * floor.abs().max(1.0));
    }

    /// Re ∫γ over [a, b] is at least Re √λ · (b − a).
    #[test]
    fn integral_real_part_floor(lambda in admissible_lambda(),
                                mu in 0.0f64..1e4,
                                a in 1.0f64..10.0,
                                len in 0.1f64..10.0) {
        let b = a + len;
        let v = rdich_core::symbols::integrate_gamma(lambda, mu, a, b).unwrap();
        let floor = gamma_real_lower_bound(lambda).unwrap() * len;
        prop_assert!(v.re >= floor - 1e-8, "Re∫γ = {} below {floor}", v.re);
    }

    /// L² ≤ H¹ and the gradient energy never exceeds H¹².
    #[test]
    fn norm_ordering(seed in any::<u64>(), n in 2u32..5, k_max in 0u32..6, d in 1usize..4) {
        let sphere = SphereSpec::new(n, k_max);
        let mut rng = rdich_core::rng::CounterRng::for_sample(seed, 0);
        let coeffs: Vec<Complex64> = (0..sphere.total_pairs() * d)
            .map(|_| z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            .collect();
        let u = SpectralField::from_coeffs(sphere, d, BasisTag::Canonical, coeffs);
        let l2 = u.norm(NormKind::L2);
        let h1 = u.norm(NormKind::H1);
        prop_assert!(l2 <= h1 * (1.0 + 1e-12));
        prop_assert!(u.gradient_energy() <= h1 * h1 * (1.0 + 1e-12));
    }

    /// Eigen-basis round trip reproduces coefficients to 1e-10 · cond.
    #[test]
    fn basis_round_trip(seed in any::<u64>()) {
        let mut rng = rdich_core::rng::CounterRng::for_sample(seed, 1);
        let d = 2 + (rng.next_u64() % 2) as usize;
        let mut rows = Vec::new();
        for i in 0..d {
            let mut row: Vec<Complex64> = (0..d)
                .map(|_| z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
                .collect();
            row[i] += z(2.0 + i as f64, 0.0);
            rows.push(row);
        }
        let pot = PotentialMatrix::new(ZMat::from_rows(&rows)).unwrap();
        let Ok(eig) = eigendecompose(&pot) else { return Ok(()) };
        let sphere = SphereSpec::new(3, 3);
        let coeffs: Vec<Complex64> = (0..sphere.total_pairs() * d)
            .map(|_| z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            .collect();
        let u = SpectralField::from_coeffs(sphere, d, BasisTag::Canonical, coeffs);
        let back = u.to_eigen_basis(&eig).to_canonical_basis(&eig);
        let err: f64 = u.coeffs().iter().zip(back.coeffs())
            .map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-10 * eig.cond() * scale.max(1.0));
    }

    /// A positive real shift never breaks H1.
    #[test]
    fn h1_monotone_under_shift(seed in any::<u64>(), shift in 0.0f64..5.0) {
        let mut rng = rdich_core::rng::CounterRng::for_sample(seed, 2);
        let d = 1 + (rng.next_u64() % 3) as usize;
        let lambdas: Vec<Complex64> = (0..d)
            .map(|_| z(rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0)))
            .collect();
        let before = check_hypotheses(&eigen_from(&lambdas));
        let shifted: Vec<Complex64> = lambdas.iter().map(|l| l + shift).collect();
        let after = check_hypotheses(&eigen_from(&shifted));
        if before.h1 {
            prop_assert!(after.h1, "shift +{shift} broke H1 for {lambdas:?}");
        }
    }
}

fn eigen_from(lambdas: &[Complex64]) -> EigenData {
    eigendecompose(&PotentialMatrix::diagonal(lambdas)).unwrap()
}
