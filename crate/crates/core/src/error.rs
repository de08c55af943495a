use thiserror::Error;

/// Errors raised by the kernels, solver, analysis and constants modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re} + {im}i is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("coincident points: |z - zeta| = {separation:e} is below the singular threshold")]
    CoincidentPoints { separation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms")]
    SeriesBudget { terms: usize },

    #[error("quadrature did not reach tolerance {tol:e} after {refinements} refinements (last change {change:e})")]
    QuadratureBudget {
        tol: f64,
        refinements: usize,
        change: f64,
    },

    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),

    #[error("invalid function data: {0}")]
    InvalidFunction(String),

    #[error("unknown case '{0}'")]
    UnknownCase(String),

    #[error("invalid case parameter: {0}")]
    InvalidCaseParameter(String),

    #[error("case '{0}' has no closed-form oracle")]
    NoOracle(String),

    #[error("case '{0}' has no exact dilatation K")]
    MissingExactK(String),

    #[error("step h = {h:e} leaves the disk or is out of range at |z| = {modulus}")]
    StepOutsideDisk { h: f64, modulus: f64 },

    #[error("harmonic part is not a homeomorphism: inf |d/dz P[f*]| = {inf_dz:e} at {re} + {im}i")]
    NotHomeomorphic { inf_dz: f64, re: f64, im: f64 },

    #[error("boundary trace is not a circle diffeomorphism at theta = {theta}: eta' = {eta_prime}")]
    NonDiffeomorphic { theta: f64, eta_prime: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
