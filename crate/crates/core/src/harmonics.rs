//! Mode bookkeeping on S^{n−1}: Laplace–Beltrami eigenvalues, multiplicities,
//! and truncated coefficient fields in the joint harmonic/eigenvector basis.
//!
//! A field u ∈ H^s(S^{n−1}, ℂᵈ) is stored as coefficients u_{kjℓ} indexed by
//! harmonic degree k ≤ K, multiplicity index j < N(k, n), and fiber index
//! ℓ < d. The `basis_tag` records whether ℓ runs over the canonical ℂᵈ basis
//! or the eigenvector basis of V∞ (u_{kjℓ} = (R⁻¹u_{kj})_ℓ). All indices are
//! zero-based, including in the serialized forms.
//!
//! No pointwise synthesis on the sphere happens anywhere; computation lives
//! entirely in coefficient space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SymbolError;
use crate::spectral::EigenData;
use crate::symbols::gamma;

/// Ambient dimension and truncation degree of the harmonic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    /// Ambient dimension n ≥ 2 (the sphere is S^{n−1}).
    pub n: u32,
    /// Truncation degree K ≥ 0.
    #[serde(rename = "K")]
    pub k_max: u32,
}

impl SphereSpec {
    pub fn new(n: u32, k_max: u32) -> Self {
        assert!(n >= 2, "ambient dimension must be at least 2");
        SphereSpec { n, k_max }
    }

    /// Number of (k, j) coefficient pairs below the truncation.
    pub fn total_pairs(&self) -> usize {
        (0..=self.k_max).map(|k| mode_multiplicity(k, self.n) as usize).sum()
    }
}

/// Laplace–Beltrami eigenvalue μ_k = k(k + n − 2) on S^{n−1}.
pub fn laplace_eigenvalue(k: u32, n: u32) -> f64 {
    assert!(n >= 2, "ambient dimension must be at least 2");
    let k = k as f64;
    let n = n as f64;
    k * (k + n - 2.0)
}

/// Dimension N(k, n) of the space of degree-k spherical harmonics on S^{n−1}.
pub fn mode_multiplicity(k: u32, n: u32) -> u64 {
    assert!(n >= 2, "ambient dimension must be at least 2");
    if k == 0 {
        return 1;
    }
    match n {
        2 => 2,
        3 => 2 * k as u64 + 1,
        _ => {
            let b1 = binomial(n as u64 + k as u64 - 1, k as u64);
            let b2 = if k >= 2 {
                binomial(n as u64 + k as u64 - 3, k as u64 - 2)
            } else {
                0
            };
            b1 - b2
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("multiplicity overflows u64; truncation too large")
}

/// Which ℂᵈ basis the fiber index ℓ refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Canonical,
    Eigen,
}

/// Norm kinds on the truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    H1,
    /// H1 divided by r.
    H1Scaled(f64),
}

/// Truncated coefficient array u_{kjℓ}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    sphere: SphereSpec,
    d: usize,
    basis: BasisTag,
    /// Offsets (in pair units) of each degree block, plus the total.
    pair_offsets: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(sphere: SphereSpec, d: usize, basis: BasisTag) -> Self {
        assert!(d >= 1, "fiber dimension must be at least 1");
        let mut pair_offsets = Vec::with_capacity(sphere.k_max as usize + 2);
        let mut acc = 0usize;
        for k in 0..=sphere.k_max {
            pair_offsets.push(acc);
            acc += mode_multiplicity(k, sphere.n) as usize;
        }
        pair_offsets.push(acc);
        SpectralField {
            sphere,
            d,
            basis,
            pair_offsets,
            coeffs: vec![Complex64::new(0.0, 0.0); acc * d],
        }
    }

    /// Wrap an existing coefficient vector; length must be d·Σ_k N(k, n).
    pub fn from_coeffs(
        sphere: SphereSpec,
        d: usize,
        basis: BasisTag,
        coeffs: Vec<Complex64>,
    ) -> Self {
        let mut f = SpectralField::zeros(sphere, d, basis);
        assert_eq!(
            coeffs.len(),
            f.coeffs.len(),
            "coefficient count must be d * total multiplicity"
        );
        f.coeffs = coeffs;
        f
    }

    pub fn sphere(&self) -> SphereSpec {
        self.sphere
    }

    pub fn fiber_dim(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn pair_index(&self, k: u32, j: usize) -> usize {
        assert!(k <= self.sphere.k_max, "degree {k} above truncation");
        let mult = (self.pair_offsets[k as usize + 1] - self.pair_offsets[k as usize]) as usize;
        assert!(j < mult, "multiplicity index {j} out of range for degree {k}");
        self.pair_offsets[k as usize] + j
    }

    /// The ℂᵈ coefficient vector u_{kj}.
    pub fn pair(&self, k: u32, j: usize) -> &[Complex64] {
        let p = self.pair_index(k, j);
        &self.coeffs[p * self.d..(p + 1) * self.d]
    }

    pub fn pair_mut(&mut self, k: u32, j: usize) -> &mut [Complex64] {
        let p = self.pair_index(k, j);
        let d = self.d;
        &mut self.coeffs[p * d..(p + 1) * d]
    }

    pub fn coeff(&self, k: u32, j: usize, ell: usize) -> Complex64 {
        assert!(ell < self.d);
        self.pair(k, j)[ell]
    }

    /// Position of (k, j, ℓ) in the flat coefficient array.
    pub fn flat_index(&self, k: u32, j: usize, ell: usize) -> usize {
        assert!(ell < self.d);
        self.pair_index(k, j) * self.d + ell
    }

    pub fn set_coeff(&mut self, k: u32, j: usize, ell: usize, value: Complex64) {
        assert!(ell < self.d);
        self.pair_mut(k, j)[ell] = value;
    }

    /// Iterate (k, μ_k, j, u_{kj}) over all pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, f64, usize, &[Complex64])> {
        let n = self.sphere.n;
        (0..=self.sphere.k_max).flat_map(move |k| {
            let mu = laplace_eigenvalue(k, n);
            let mult = (self.pair_offsets[k as usize + 1] - self.pair_offsets[k as usize]) as usize;
            (0..mult).map(move |j| (k, mu, j, self.pair(k, j)))
        })
    }

    fn require_basis(&self, basis: BasisTag, what: &str) {
        assert!(
            self.basis == basis,
            "{what} requires the {basis:?} basis; convert first"
        );
    }

    /// Change of basis u ↦ R⁻¹u per pair.
    pub fn to_eigen_basis(&self, eig: &EigenData) -> SpectralField {
        self.require_basis(BasisTag::Canonical, "to_eigen_basis");
        assert_eq!(eig.dim(), self.d);
        self.map_pairs(BasisTag::Eigen, |v| eig.r_inv().matvec(v))
    }

    /// Change of basis û ↦ Rû per pair.
    pub fn to_canonical_basis(&self, eig: &EigenData) -> SpectralField {
        self.require_basis(BasisTag::Eigen, "to_canonical_basis");
        assert_eq!(eig.dim(), self.d);
        self.map_pairs(BasisTag::Canonical, |v| eig.r_mat().matvec(v))
    }

    fn map_pairs(
        &self,
        new_basis: BasisTag,
        f: impl Fn(&[Complex64]) -> Vec<Complex64>,
    ) -> SpectralField {
        let mut out = SpectralField::zeros(self.sphere, self.d, new_basis);
        let total = self.pair_offsets[self.sphere.k_max as usize + 1];
        for p in 0..total {
            let src = &self.coeffs[p * self.d..(p + 1) * self.d];
            let dst = f(src);
            out.coeffs[p * self.d..(p + 1) * self.d].copy_from_slice(&dst);
        }
        out
    }

    /// L², H¹ (Σ (1+μ_k)‖u_{kj}‖²)^{1/2}, or H¹/r. Canonical basis only.
    pub fn norm(&self, kind: NormKind) -> f64 {
        self.require_basis(BasisTag::Canonical, "norm");
        let mut acc = 0.0f64;
        for (_k, mu, _j, v) in self.pairs() {
            let w: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            acc += match kind {
                NormKind::L2 => w,
                NormKind::H1 | NormKind::H1Scaled(_) => (1.0 + mu) * w,
            };
        }
        match kind {
            NormKind::H1Scaled(r) => acc.sqrt() / r,
            _ => acc.sqrt(),
        }
    }

    /// Σ_{k,j} μ_k ‖u_{kj}‖² — the gradient part of the H¹ norm.
    pub fn gradient_energy(&self) -> f64 {
        self.require_basis(BasisTag::Canonical, "gradient_energy");
        self.pairs()
            .map(|(_k, mu, _j, v)| mu * v.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// ‖A(r)^{1/2} u‖_{L²} = (Σ_{k,j} ‖R diag(γ_{kℓ}(r)) R⁻¹ u_{kj}‖²)^{1/2}.
    pub fn graph_norm(&self, eig: &EigenData, r: f64) -> Result<f64, SymbolError> {
        self.require_basis(BasisTag::Canonical, "graph_norm");
        assert_eq!(eig.dim(), self.d);
        assert!(r >= 1.0, "radius must be at least 1");
        let mut acc = 0.0f64;
        for k in 0..=self.sphere.k_max {
            let mu = laplace_eigenvalue(k, self.sphere.n);
            let gammas: Vec<Complex64> = eig
                .lambdas()
                .iter()
                .map(|&l| gamma(l, mu, r))
                .collect::<Result<_, _>>()?;
            let mult = mode_multiplicity(k, self.sphere.n) as usize;
            for j in 0..mult {
                let mut hat = eig.r_inv().matvec(self.pair(k, j));
                for (ell, h) in hat.iter_mut().enumerate() {
                    *h *= gammas[ell];
                }
                let w = eig.r_mat().matvec(&hat);
                acc += w.iter().map(|x| x.norm_sqr()).sum::<f64>();
            }
        }
        Ok(acc.sqrt())
    }
}
