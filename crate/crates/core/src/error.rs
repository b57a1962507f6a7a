use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("expected {expected} values for the lattice, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite potential value at position {0}")]
    NonFinite(usize),

    #[error("invalid partition {parts:?} for dimension {dim}")]
    InvalidPartition { parts: Vec<usize>, dim: usize },

    #[error("coefficients are not Hermitian-symmetric: imaginary residue {residue:e} exceeds {tol:e}")]
    HermitianSymmetryViolation { residue: f64, tol: f64 },

    #[error("potential is not separable: |V^({index:?})| = {magnitude:e} exceeds {tol:e}")]
    NotSeparable {
        index: Vec<i64>,
        magnitude: f64,
        tol: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("evaluation point has a zero component on axis {0}")]
    ZeroComponent(usize),

    #[error("evaluation point has {got} components, lattice dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver failed to converge at k = {0:?}")]
    EigensolverFailure(Vec<f64>),

    #[error("interpolation inconsistency: {0}")]
    InterpolationInconsistency(String),

    #[error("missing leading term z_{axis}^{exponent}")]
    MissingLeadingTerm { axis: usize, exponent: i64 },

    #[error("potentials live on different lattices: {0:?} vs {1:?}")]
    LatticeMismatch(Vec<usize>, Vec<usize>),

    #[error("periods {0:?} are not pairwise coprime")]
    NotCoprime(Vec<usize>),

    #[error("dimension {got} is too small, at least {required} required")]
    DimensionTooSmall { required: usize, got: usize },

    #[error("invalid shell: {0}")]
    InvalidShell(String),

    #[error("could not draw a pole-free sample after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
