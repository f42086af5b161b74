use thiserror::Error;

use crate::normal_form::NormalFormTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structure constants are not antisymmetric: c[{k}][{i}][{j}] = {value}, c[{k}][{j}][{i}] = {mirror}")]
    NotAntisymmetric {
        k: usize,
        i: usize,
        j: usize,
        value: f64,
        mirror: f64,
    },

    #[error("Jacobi identity fails on basis triple {triple:?} with residual {residual:e}")]
    JacobiViolation { triple: [usize; 3], residual: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("bilinear form matrix is not symmetric")]
    NotSymmetric,

    #[error("bilinear form is degenerate")]
    DegenerateForm,

    #[error("causal character of the zero vector is undefined")]
    ZeroVector,

    #[error("matrix is not an automorphism of the algebra (bracket residual {residual:e})")]
    InvalidAutomorphism { residual: f64 },

    #[error("bilinear form is not Lorentzian: signature ({0}, {1}, {2})")]
    NotLorentzian(usize, usize, usize),

    #[error("case split is numerically ambiguous: {invariant} = {value:e} lies within 10x of its zero threshold {threshold:e}")]
    NumericallyAmbiguousCase {
        invariant: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("normal form {tag:?} (param {param:?}) is not a Lorentzian normal form for lambda = {lambda}")]
    TagInvalidForLambda {
        lambda: f64,
        tag: NormalFormTag,
        param: Option<f64>,
    },

    #[error("idempotents form a continuum through {sample:?}")]
    NonIsolatedSolutionSet { sample: [f64; 3] },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("trajectory left the domain of the invariant at t = {t}")]
    DomainExit { t: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("no incompleteness witness is provided for this algebra: {0}")]
    UnsupportedAlgebra(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("verdict is not corroborated: {0}")]
    CorroborationFailure(String),

    #[error("idempotent census mismatch: {0}")]
    CensusMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the command-line contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericallyAmbiguousCase { .. } => 2,
            Error::CorroborationFailure(_) => 3,
            _ => 1,
        }
    }
}
