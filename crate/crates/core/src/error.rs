use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} is not {kind} (residual {residual:.3e} > tolerance {tolerance:.3e})")]
    Symmetry {
        what: &'static str,
        kind: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("malformed CCR matrix: antisymmetry residual {residual:.3e} exceeds {tolerance:.3e}")]
    MalformedCcr { residual: f64, tolerance: f64 },

    #[error("CCR matrix is singular")]
    SingularCcr,

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.6e})")]
    NotPsd(f64),

    #[error("matrix is not positive definite (minimum eigenvalue {0:.6e})")]
    NotPositiveDefinite(f64),

    #[error("uncertainty relation violated: P + i*Theta has eigenvalue {0:.6e}")]
    Heisenberg(f64),

    #[error("eigenvalue {eigenvalue} lies on the branch cut of the principal logarithm")]
    BranchCut { eigenvalue: Complex64 },

    #[error("determinant {determinant} admits no continuous principal square root")]
    DeterminantBranch { determinant: Complex64 },

    #[error("canonicalization failed: reconstruction residual {0:.3e}")]
    Canonicalization(f64),

    #[error("imaginary residual {residual:.3e} exceeds {tolerance:.3e}: conjugation symmetry violated")]
    ConjugationSymmetry { residual: f64, tolerance: f64 },

    #[error("classical moment diverges: spectral radius of 2*P*Pi is {0:.6e}")]
    ClassicalDivergence(f64),

    #[error("problem is infeasible: spectral radius {0:.6e} >= 1")]
    Infeasible(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("decomposition did not converge: {0}")]
    NoConvergence(&'static str),
}

impl Error {
    /// True for errors caused by ill-formed input rather than by the
    /// mathematics of a well-formed problem.
    pub fn is_malformed_input(&self) -> bool {
        matches!(
            self,
            Error::NotSquare(..)
                | Error::Dimension(_)
                | Error::NonFinite(_)
                | Error::InvalidInput(_)
                | Error::Symmetry { .. }
                | Error::MalformedCcr { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
