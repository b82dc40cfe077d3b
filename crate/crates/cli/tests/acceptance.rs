//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Criteria that name
//! CLI behavior spawn the actual binary.

use std::path::{Path, PathBuf};
use std::process::Output;
use std::time::Instant;

use num_complex::Complex64;
use rdich_core::bvp::{fd_oracle, solve_mode_bvp, OuterBc};
use rdich_core::dichotomy::{iso_check, measure_decay, stable_factor};
use rdich_core::harmonics::{BasisTag, SphereSpec, SpectralField};
use rdich_core::lemma_lab::{a6_core_proof, a6_core_statement};
use rdich_core::ode::OdeOptions;
use rdich_core::par::ExecMode;
use rdich_core::rng::CounterRng;
use rdich_core::special::bessel_k_scaled;
use rdich_core::spectral::{eigendecompose, PotentialMatrix};
use rdich_core::symbols::{dgamma, gamma, integrate_gamma};
use rdich_core::zmat::ZMat;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rdich")
}

fn run_bin(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = std::process::Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary failed to launch")
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Build V = B·diag(λ)·B⁻¹ and serialize it as a config JSON.
fn potential_from(lambdas: &[Complex64], basis: Option<&ZMat>) -> PotentialMatrix {
    let d = lambdas.len();
    match basis {
        None => PotentialMatrix::diagonal(lambdas),
        Some(b) => {
            let mut ld = ZMat::zeros(d, d);
            for (i, &l) in lambdas.iter().enumerate() {
                ld[(i, i)] = l;
            }
            let m = b.mul(&ld).mul(&b.inverse().expect("basis invertible"));
            PotentialMatrix::new(m).unwrap()
        }
    }
}

fn config_json(pot: &PotentialMatrix, n: u32, k_max: u32, seed: u64) -> String {
    let d = pot.dim();
    let rows: Vec<Vec<[f64; 2]>> = (0..d)
        .map(|i| (0..d).map(|j| [pot.matrix()[(i, j)].re, pot.matrix()[(i, j)].im]).collect())
        .collect();
    serde_json::to_string(&serde_json::json!({
        "sphere": {"n": n, "K": k_max},
        "potential": {"d": d, "V": rows},
        "seed": seed
    }))
    .unwrap()
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rdich_accept_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn wedge(modulus: f64, sign: f64) -> Complex64 {
    Complex64::from_polar(modulus, sign * (std::f64::consts::PI - 0.15))
}

fn basis2(a: f64) -> ZMat {
    ZMat::from_rows(&[vec![z(1.0, 0.0), z(a, 0.2)], vec![z(0.0, -0.3), z(1.0, 0.0)]])
}

fn basis3(a: f64) -> ZMat {
    ZMat::from_rows(&[
        vec![z(1.0, 0.0), z(a, 0.1), z(0.0, 0.0)],
        vec![z(0.2, -0.1), z(1.0, 0.0), z(0.3, 0.0)],
        vec![z(0.0, 0.1), z(0.0, 0.0), z(1.0, 0.0)],
    ])
}

/// The twelve-case hypothesis grid: d ∈ {1,2,3}, eigenvalues covering
/// real-positive, complex-conjugate pairs, and the near-cut wedge.
fn hypothesis_grid() -> Vec<PotentialMatrix> {
    vec![
        // d = 1
        potential_from(&[z(1.0, 0.0)], None),
        potential_from(&[z(0.0, 1.0)], None),
        potential_from(&[wedge(2.0, 1.0)], None),
        potential_from(&[wedge(0.8, -1.0)], None),
        // d = 2
        potential_from(&[z(1.0, 0.0), z(4.0, 0.0)], None),
        // real matrix with conjugate pair 1 ± 2i
        PotentialMatrix::new(ZMat::from_rows(&[
            vec![z(1.0, 0.0), z(2.0, 0.0)],
            vec![z(-2.0, 0.0), z(1.0, 0.0)],
        ]))
        .unwrap(),
        potential_from(&[wedge(1.5, 1.0), wedge(1.5, -1.0)], Some(&basis2(0.7))),
        potential_from(&[z(2.0, 0.0), z(0.5, 1.5)], Some(&basis2(0.4))),
        // d = 3
        potential_from(&[z(0.5, 0.0), z(1.0, 0.0), z(4.0, 0.0)], None),
        potential_from(&[z(1.0, 2.0), z(1.0, -2.0), z(3.0, 0.0)], Some(&basis3(0.5))),
        potential_from(&[wedge(2.0, 1.0), wedge(2.0, -1.0), z(1.0, 0.0)], Some(&basis3(0.3))),
        potential_from(&[z(0.3, 0.0), z(5.0, 0.5), z(5.0, -0.5)], Some(&basis3(0.6))),
    ]
}

#[test]
fn criterion_1_lemma_suite_on_hypothesis_grid() {
    let dir = tmpdir("c1");
    let grid = hypothesis_grid();
    let started = Instant::now();
    for (i, pot) in grid.iter().enumerate() {
        let cfg_path = dir.join(format!("case_{i}.json"));
        write(&cfg_path, &config_json(pot, 3, 6, 42));
        let out_path = dir.join(format!("report_{i}.json"));
        let out = run_bin(
            &[
                "verify-lemmas",
                "--config",
                cfg_path.to_str().unwrap(),
                "--lemma",
                "all",
                "--count",
                "100000",
                "--seed",
                "42",
                "--out",
                out_path.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "case {i}: exit {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        let reports: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        let arr = reports.as_array().unwrap();
        assert_eq!(arr.len(), 9, "case {i}: expected 9 lemma reports");
        for rep in arr {
            let lemma = rep["lemma"].as_str().unwrap();
            let c = rep["c_estimate"].as_f64().unwrap();
            assert!(rep["pass"].as_bool().unwrap(), "case {i} lemma {lemma} failed");
            assert!(c.is_finite(), "case {i} lemma {lemma} non-finite estimate");
            if matches!(lemma, "A1" | "A7a" | "A7b" | "A8") {
                assert!(c <= 1.0 + 1e-10, "case {i} lemma {lemma}: c = {c}");
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "1 (lemma suite, 12-case grid)",
        elapsed <= 60.0,
        &format!("12 cases x 9 lemmas x 100000 samples in {elapsed:.1} s (budget 60 s)"),
    );
}

#[test]
fn criterion_2_rate_floor() {
    let opts = OdeOptions::default();
    let pairs: Vec<(f64, f64)> = (0..12)
        .map(|i| (1.0 + 0.1 + (10.0 - 0.1) * i as f64 / 11.0, 1.0))
        .collect();

    // Exact rates for the constant-coefficient cases.
    let mut max_dev: f64 = 0.0;
    for (lam, want) in [(1.0, 1.0), (4.0, 2.0)] {
        let eig = eigendecompose(&PotentialMatrix::diagonal(&[z(lam, 0.0)])).unwrap();
        let fit = measure_decay(&eig, &[0.0], &pairs, ExecMode::Auto, &opts).unwrap();
        max_dev = max_dev.max((fit.eta - want).abs());
    }

    // Twenty randomized H2 potentials with d ≤ 3.
    let mut floor_ok = true;
    let mut worst_margin = f64::INFINITY;
    for trial in 0..20u64 {
        let mut rng = CounterRng::for_sample(0xACC2, trial);
        let d = 1 + (rng.next_u64() % 3) as usize;
        let lambdas: Vec<Complex64> = (0..d)
            .map(|_| {
                if rng.next_f64() < 0.5 {
                    z(rng.uniform(0.3, 4.0), 0.0)
                } else {
                    z(rng.uniform(0.2, 3.0), rng.uniform(-2.0, 2.0))
                }
            })
            .collect();
        let basis = if d == 1 || rng.next_f64() < 0.3 {
            None
        } else {
            let mut b = ZMat::identity(d);
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        b[(i, j)] = z(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
                    }
                }
            }
            Some(b)
        };
        let pot = potential_from(&lambdas, basis.as_ref());
        let eig = eigendecompose(&pot).unwrap();
        let mus = [0.0, 2.0, 6.0];
        let fit = measure_decay(&eig, &mus, &pairs, ExecMode::Auto, &opts).unwrap();
        let floor = eig.lambdas().iter().map(|l| l.sqrt().re).fold(f64::INFINITY, f64::min);
        let margin = fit.eta - (floor - 0.01);
        worst_margin = worst_margin.min(margin);
        if margin < 0.0 {
            floor_ok = false;
        }
    }
    report(
        "2 (dichotomy rate floor)",
        floor_ok && max_dev < 1e-3,
        &format!(
            "eta recovery |dev| = {max_dev:.2e} (tol 1e-3); worst floor margin {worst_margin:+.3e} over 20 potentials"
        ),
    );
}

#[test]
fn criterion_3_bessel_oracle_factors() {
    let opts = OdeOptions::default();
    let mut worst = 0.0f64;
    for &mu in &[1.0f64, 6.0] {
        let nu = (mu + 0.25).sqrt();
        let expect = 3.0f64.sqrt() * bessel_k_scaled(nu, 3.0) * (-2.0f64).exp()
            / bessel_k_scaled(nu, 1.0);
        let (phi, _, _) = stable_factor(z(1.0, 0.0), mu, 1.0, 3.0, &opts).unwrap();
        let rel = (phi - z(expect, 0.0)).norm() / expect;
        worst = worst.max(rel);
    }
    report(
        "3 (Bessel oracle, stable factors)",
        worst < 1e-5,
        &format!("max relative deviation {worst:.2e} over mu in {{1, 6}} (tol 1e-5)"),
    );
}

#[test]
fn criterion_4_bvp_oracle_equivalence() {
    // Closed form at N = 1024.
    let p = solve_mode_bvp(z(1.0, 0.0), 0.0, 1.0, 3.0, z(1.0, 0.0), OuterBc::Dirichlet(z(0.0, 0.0)), 1024)
        .unwrap();
    let closed_err = p
        .r_grid
        .iter()
        .zip(p.values.iter())
        .map(|(&r, v)| (v - z((3.0 - r).sinh() / 2.0f64.sinh(), 0.0)).norm())
        .fold(0.0, f64::max);

    // Convergence factor per doubling.
    let mut errs = Vec::new();
    for &n in &[64usize, 128, 256, 512] {
        let p = solve_mode_bvp(z(1.0, 0.0), 0.0, 1.0, 3.0, z(1.0, 0.0), OuterBc::Dirichlet(z(0.0, 0.0)), n)
            .unwrap();
        errs.push(
            p.r_grid
                .iter()
                .zip(p.values.iter())
                .map(|(&r, v)| (v - z((3.0 - r).sinh() / 2.0f64.sinh(), 0.0)).norm())
                .fold(0.0, f64::max),
        );
    }
    let min_factor = errs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);

    // Twenty random H2 cases against the independent dense oracle.
    let mut worst_gap = 0.0f64;
    for trial in 0..20u64 {
        let mut rng = CounterRng::for_sample(0xACC4, trial);
        let lambda = if rng.next_f64() < 0.5 {
            z(rng.uniform(0.3, 3.0), 0.0)
        } else {
            z(rng.uniform(0.2, 2.0), rng.uniform(-1.5, 1.5))
        };
        let mu = rng.log_uniform(1e-2, 40.0);
        let r0 = rng.uniform(1.0, 2.0);
        let r1 = r0 + rng.uniform(1.0, 3.0);
        let a = z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let b = z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let p = solve_mode_bvp(lambda, mu, r0, r1, a, OuterBc::Dirichlet(b), 1024).unwrap();
        let o = fd_oracle(lambda, mu, r0, r1, a, b, 4096).unwrap();
        for (&r, v) in p.r_grid.iter().zip(p.values.iter()) {
            let pos = (((r - r0) / (r1 - r0)) * 4096.0).round() as usize;
            if (o.r_grid[pos.min(4096)] - r).abs() < 1e-9 {
                worst_gap = worst_gap.max((v - o.values[pos.min(4096)]).norm());
            }
        }
    }
    report(
        "4 (BVP oracle equivalence)",
        closed_err < 1e-6 && min_factor >= 3.5 && worst_gap < 1e-4,
        &format!(
            "closed-form error {closed_err:.2e} (tol 1e-6); convergence factor {min_factor:.2} (>= 3.5); solver-vs-oracle gap {worst_gap:.2e} (tol 1e-4)"
        ),
    );
}

#[test]
fn criterion_5_symbol_identities() {
    let mut worst_sq = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_add = 0.0f64;
    for i in 0..10_000u64 {
        let mut rng = CounterRng::for_sample(0xACC5, i);
        let lambda = loop {
            let l = z(rng.uniform(-3.0, 4.0), rng.uniform(-3.0, 3.0));
            if l.norm() > 1e-6 && l.arg().abs() <= std::f64::consts::PI - 0.1 {
                break l;
            }
        };
        let mu = rng.log_uniform(1e-4, 1e6);
        let r = rng.log_uniform(1.0, 100.0);

        // Branch identity.
        let g = gamma(lambda, mu, r).unwrap();
        let target = lambda + mu / (r * r);
        worst_sq = worst_sq.max((g * g - target).norm() / target.norm());
        assert!(g.re > 0.0 || (g.re == 0.0 && g.im > 0.0));

        // Derivative vs central difference, on samples where the quotient
        // resolves the derivative (well above its own rounding floor).
        let h = 1e-6 * r;
        let gp = gamma(lambda, mu, r + h).unwrap();
        let gm = gamma(lambda, mu, r - h).unwrap();
        let fd = (gp - gm) / (2.0 * h);
        let an = dgamma(lambda, mu, r).unwrap();
        let floor = 20.0 * f64::EPSILON * (gp.norm() + gm.norm()) / (2.0 * h);
        if an.norm() > 3e5 * floor {
            worst_fd = worst_fd.max((fd - an).norm() / an.norm());
        }

        // Integral additivity on a fresh triple of radii.
        if i % 20 == 0 {
            let a = rng.uniform(1.0, 5.0);
            let b = a + rng.uniform(0.1, 5.0);
            let c = b + rng.uniform(0.1, 5.0);
            let mu_small = rng.log_uniform(1e-2, 1e3);
            let whole = integrate_gamma(lambda, mu_small, a, c).unwrap();
            let split = integrate_gamma(lambda, mu_small, a, b).unwrap()
                + integrate_gamma(lambda, mu_small, b, c).unwrap();
            worst_add = worst_add.max((whole - split).norm());
        }
    }
    report(
        "5 (symbol identities)",
        worst_sq < 1e-12 && worst_fd < 1e-5 && worst_add < 1e-9,
        &format!(
            "gamma^2 relative {worst_sq:.2e} (tol 1e-12); derivative vs FD {worst_fd:.2e} (tol 1e-5); additivity {worst_add:.2e} (tol 1e-9)"
        ),
    );
}

#[test]
fn criterion_6_graph_norm_constants() {
    // 10^4 random fields split across four potentials from the grid, r ∈ [1, 100].
    let pots = [
        potential_from(&[z(1.0, 0.0)], None),
        potential_from(&[wedge(2.0, 1.0)], None),
        potential_from(&[wedge(1.5, 1.0), wedge(1.5, -1.0)], Some(&basis2(0.7))),
        potential_from(&[z(1.0, 2.0), z(1.0, -2.0), z(3.0, 0.0)], Some(&basis3(0.5))),
    ];
    let sphere = SphereSpec::new(3, 6);
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    for (pi, pot) in pots.iter().enumerate() {
        let eig = eigendecompose(pot).unwrap();
        let d = eig.dim();
        for i in 0..2500u64 {
            let mut rng = CounterRng::for_sample(0xACC6 + pi as u64, i);
            let r = rng.log_uniform(1.0, 100.0);
            let coeffs: Vec<Complex64> = (0..sphere.total_pairs() * d)
                .map(|_| z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
                .collect();
            let u = SpectralField::from_coeffs(sphere, d, BasisTag::Canonical, coeffs);
            let (ra, rb) = iso_check(&u, &eig, r).unwrap();
            worst_a = worst_a.max(ra);
            worst_b = worst_b.max(rb);
        }
    }
    report(
        "6 (graph-norm constants)",
        worst_a <= 1.0 + 1e-10 && worst_b <= 1.0 + 1e-10,
        &format!("worst ratio_a {worst_a:.12}; worst ratio_b {worst_b:.12} (both <= 1 + 1e-10)"),
    );
}

#[test]
fn criterion_7_a6_statement_vs_proof() {
    // Family (r1, r2) = (t^3, t^2 + delta) with dyadic t, so the statement
    // polynomial r1^2 - r2^3 vanishes exactly at delta = 0.
    let lambda = z(1.0, 0.0);
    let mu = 4.0;
    let t = 1.25f64;
    let r1 = t.powi(3);
    let mut statement_seq = Vec::new();
    let mut proof_max = 0.0f64;
    for decade in 0..8 {
        let delta = 10f64.powi(-decade);
        let r2 = t.powi(2) + delta;
        statement_seq.push(a6_core_statement(lambda, mu, r1, r2));
        proof_max = proof_max.max(a6_core_proof(lambda, mu, r1, r2));
    }
    let growing = statement_seq.windows(2).all(|w| w[1] > 4.0 * w[0]);
    let on_curve = a6_core_statement(lambda, mu, r1, t.powi(2));
    report(
        "7 (A6 statement/proof discrepancy)",
        growing && !on_curve.is_finite() && proof_max < 1.0,
        &format!(
            "statement-core residual grows {:.2e} -> {:.2e} and diverges on the curve (last = {on_curve}); proof-core stays <= {proof_max:.3}",
            statement_seq[0],
            statement_seq[statement_seq.len() - 1]
        ),
    );
}

#[test]
fn criterion_8_cli_determinism() {
    let dir = tmpdir("c8");
    let pot = potential_from(&[z(1.0, 2.0), z(1.0, -2.0)], Some(&basis2(0.4)));
    let cfg = dir.join("cfg.json");
    write(&cfg, &config_json(&pot, 3, 3, 42));

    // Boundary data for solve: ones field in the eigen basis.
    let sphere = SphereSpec::new(3, 3);
    let ones = SpectralField::from_coeffs(
        sphere,
        2,
        BasisTag::Eigen,
        vec![z(1.0, 0.0); sphere.total_pairs() * 2],
    );
    let bc = dir.join("bc.json");
    write(
        &bc,
        &format!("{{\"inner\": {}, \"outer\": \"decay\"}}", rdich_core::io::field_to_json(&ones)),
    );

    let cfg_s = cfg.to_str().unwrap();
    let bc_s = bc.to_str().unwrap();
    let jobs: Vec<(&str, Vec<String>)> = vec![
        (
            "spectrum",
            vec!["spectrum", "--config", cfg_s, "--format", "json"].iter().map(|s| s.to_string()).collect(),
        ),
        (
            "verify",
            vec!["verify-lemmas", "--config", cfg_s, "--lemma", "all", "--seed", "7", "--count", "2000"]
                .iter().map(|s| s.to_string()).collect(),
        ),
        (
            "symbols",
            vec!["symbols", "dump", "--config", cfg_s, "--ell", "0", "--mu", "6", "--r-from", "1", "--r-to", "8", "--points", "64"]
                .iter().map(|s| s.to_string()).collect(),
        ),
        (
            "dichotomy",
            vec!["dichotomy", "--config", cfg_s, "--r-from", "1", "--r-to", "4"]
                .iter().map(|s| s.to_string()).collect(),
        ),
        (
            "rates",
            vec!["dichotomy", "rates", "--config", cfg_s].iter().map(|s| s.to_string()).collect(),
        ),
        (
            "solve",
            vec!["solve", "--config", cfg_s, "--bc", bc_s, "--r0", "1", "--r1", "4", "--N", "64"]
                .iter().map(|s| s.to_string()).collect(),
        ),
    ];

    let mut all_ok = true;
    let mut detail = String::new();
    for (name, args) in &jobs {
        let mut outs = Vec::new();
        for (tag, envs) in [
            ("a", vec![]),
            ("b", vec![]),
            ("st", vec![("RD_THREADS", "1")]),
            ("mt", vec![("RD_THREADS", "4")]),
        ] {
            let out_path = dir.join(format!("{name}_{tag}.out"));
            let mut full: Vec<String> = args.clone();
            full.push("--out".into());
            full.push(out_path.to_str().unwrap().into());
            let argv: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
            let out = run_bin(&argv, &envs);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{name} ({tag}) exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            );
            outs.push(std::fs::read(&out_path).unwrap());
        }
        let identical = outs.windows(2).all(|w| w[0] == w[1]);
        if !identical {
            all_ok = false;
            detail.push_str(&format!("{name}: DIVERGED; "));
        } else {
            detail.push_str(&format!("{name}: {} bytes stable; ", outs[0].len()));
        }
    }
    report("8 (CLI determinism)", all_ok, detail.trim_end_matches("; "));
}
