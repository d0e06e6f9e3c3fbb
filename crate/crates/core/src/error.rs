use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AglError {
    #[error("root finder did not converge after {iterations} iterations (max correction {max_correction:e})")]
    NonConvergence {
        iterations: usize,
        max_correction: f64,
    },
    #[error("cannot take the roots of the zero polynomial")]
    ZeroPolynomial,
    #[error("repeated zero or pole near {point}; the logarithmic derivative needs simple points")]
    MultiplicityViolation { point: num_complex::Complex64 },
    #[error("hypothesis unmet: {found} zeros lie in K but k = {required}")]
    HypothesisUnmet { found: usize, required: usize },
    #[error("only {found} critical points exist but k - 1 = {required} are needed")]
    InsufficientCriticalPoints { found: usize, required: usize },
    #[error("contour sample {sample} lies within tolerance of a zero or pole")]
    SampleAtSingularity { sample: num_complex::Complex64 },
    #[error("winding integral {value} is not within 0.1 of an integer after {samples} samples")]
    NonIntegerWinding { value: f64, samples: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, AglError>;
