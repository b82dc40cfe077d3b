//! Error types shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("eigenvector basis condition number {cond:.3e} exceeds cap {cap:.3e}; matrix treated as non-diagonalizable")]
    NonDiagonalizable { cond: f64, cap: f64 },
    #[error("QR iteration failed to converge")]
    NoConvergence,
    #[error("eigendecomposition residual {resid:.3e} exceeds tolerance {tol:.3e}")]
    Residual { resid: f64, tol: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("symbol argument {value} lies on the branch cut (-inf, 0]")]
    BranchCut { value: Complex64 },
    #[error("adaptive quadrature failed: error estimate {achieved:.3e} above tolerance {requested:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DichotomyError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("Riccati slope exceeded {cap:.1e} near r = {r:.6}; wrong branch or hypothesis failure")]
    BlowUp { r: f64, cap: f64 },
    #[error("horizon r_max = {r_max} is below the last requested radius {r_last}")]
    HorizonTooShort { r_max: f64, r_last: f64 },
    #[error("stable/unstable subspaces nearly parallel: angle {angle:.3e} rad")]
    IllConditionedSplit { angle: f64 },
    #[error("decay fit failed: {0}")]
    FitFailure(String),
    #[error("ODE step size underflow at r = {r:.6}")]
    StepUnderflow { r: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvpError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("discrete operator is numerically singular (pivot {pivot:.3e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LemmaError {
    #[error("hypothesis {needed} does not hold for this potential; lemma {lemma} not applicable")]
    HypothesisViolation { lemma: &'static str, needed: &'static str },
    #[error("angle {theta} outside the domain (0, pi)")]
    DomainError { theta: f64 },
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}
