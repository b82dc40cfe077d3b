//! Cross-validation between the two independent constructions of the stable
//! radial evolution: Riccati continuation (dichotomy) and direct boundary
//! value solves with a far-field zero condition (bvp).

use num_complex::Complex64;
use rdich_core::bvp::{solve_mode_bvp, OuterBc};
use rdich_core::dichotomy::stable_factor;
use rdich_core::ode::OdeOptions;
use rdich_core::rng::CounterRng;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Fifty random H2-admissible (λ, μ): the stable propagation factor over
/// [r1, r2] matches the BVP solution with u = 0 imposed at r2 + 20.
#[test]
fn stable_factor_matches_bvp_far_field() {
    let opts = OdeOptions::default();
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let mut rng = CounterRng::for_sample(0xCF50, trial);
        let lambda = if rng.next_f64() < 0.4 {
            z(rng.uniform(0.4, 4.0), 0.0)
        } else {
            z(rng.uniform(0.3, 2.5), rng.uniform(-1.5, 1.5))
        };
        let mu = rng.log_uniform(1e-2, 30.0);
        let r1 = rng.uniform(1.0, 2.5);
        let r2 = r1 + rng.uniform(0.5, 3.0);
        let far = r2 + 20.0;

        // Dense Dirichlet solve on [r1, far] with zero at the far end.
        let n = 20_000;
        let profile = solve_mode_bvp(
            lambda,
            mu,
            r1,
            far,
            z(1.0, 0.0),
            OuterBc::Dirichlet(z(0.0, 0.0)),
            n,
        )
        .unwrap();
        // Evaluate at the grid point nearest r2 and compare against the
        // Riccati factor integrated to exactly that radius.
        let idx = profile
            .r_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - r2).abs().total_cmp(&(b.1 - r2).abs()))
            .map(|(i, _)| i)
            .unwrap();
        let r_star = profile.r_grid[idx];
        let bvp_factor = profile.values[idx];

        let (phi, _, _) = stable_factor(lambda, mu, r1, r_star, &opts).unwrap();
        let rel = (phi - bvp_factor).norm() / phi.norm();
        worst = worst.max(rel);
        assert!(
            rel < 1e-5,
            "trial {trial}: lambda={lambda}, mu={mu:.3}, [{r1:.3},{r_star:.3}]: riccati {phi} vs bvp {bvp_factor} (rel {rel:.2e})"
        );
    }
    println!("worst relative deviation over 50 cases: {worst:.3e}");
}

/// Exterior solve with far-field decay equals the stable propagator applied
/// to the inner data (the product-level face of the same equivalence).
#[test]
fn exterior_solve_equals_stable_propagation() {
    let opts = OdeOptions::default();
    for trial in 0..10u64 {
        let mut rng = CounterRng::for_sample(0xCF51, trial);
        let lambda = z(rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0));
        let mu = rng.log_uniform(1e-1, 10.0);
        let profile =
            solve_mode_bvp(lambda, mu, 1.0, 5.0, z(1.0, 0.0), OuterBc::Decay, 4096).unwrap();
        for probe in [1024usize, 2048, 4096] {
            let r = profile.r_grid[probe];
            let (phi, _, _) = stable_factor(lambda, mu, 1.0, r, &opts).unwrap();
            let rel = (phi - profile.values[probe]).norm() / phi.norm();
            assert!(
                rel < 1e-5,
                "trial {trial} at r={r:.3}: propagator {phi} vs solve {} (rel {rel:.2e})",
                profile.values[probe]
            );
        }
    }
}
