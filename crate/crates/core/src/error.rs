use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical substrate and the analysis routines built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("entry ({row}, {col}) is improper: numerator degree {num_deg} exceeds denominator degree {den_deg}")]
    Improper {
        row: usize,
        col: usize,
        num_deg: isize,
        den_deg: isize,
    },
    #[error("non-finite coefficient in system description")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("evaluation at a pole: s = {0}")]
    EvalAtPole(Complex64),
    #[error("limit s^{k} G(s) as s -> 0 diverges (origin pole of order {order})")]
    LimitDiverges { k: usize, order: usize },
    #[error("feedback interconnection is ill-posed: det(I - P(inf) C(inf)) ~ 0")]
    IllPosed,
    #[error("spectrum is not real: eigenvalue {0} has a significant imaginary part")]
    ComplexSpectrum(Complex64),
    #[error("system is not stable: pole at {0}")]
    NotStable(Complex64),
    #[error("singular matrix")]
    Singular,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid Psi parameter: {0}")]
    PsiInvalid(String),
    #[error("controller is not stable: pole at {0}")]
    ControllerUnstable(Complex64),
    #[error("no destabilizing plant can be synthesized: {0}")]
    NotSynthesizable(String),
    #[error("counterexample verification failed: {0}")]
    VerificationFailed(String),
    #[error("sufficiency counterexample found at sample {index}: {detail}")]
    SufficiencyCounterexampleFound { index: usize, detail: String },
    #[error("sampler exhausted after {0} rejected draws")]
    SamplerExhausted(usize),
    #[error("invalid sample specification: {0}")]
    InvalidSpec(String),
    #[error("invalid uncertainty class: {0}")]
    InvalidClass(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
