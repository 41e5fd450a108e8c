use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cutoff radii: need 0 < a < b, got a = {a}, b = {b}")]
    InvalidRadii { a: f64, b: f64 },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("grid sizes differ: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("vector is not in the image of the projector (|pi x - x| = {residual:e})")]
    NotInImage { residual: f64 },

    #[error("matrix is not a projector (max |pi^2 - pi| = {defect:e})")]
    NotProjector { defect: f64 },

    #[error("integrand 1/(1 - x(t)) has a pole on the grid (sample {index}, value {value})")]
    PoleOnGrid { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },

    #[error("multi-index {exponents:?} has degree {got}, expected {expected}")]
    DegreeMismatch { exponents: Vec<u32>, expected: usize, got: usize },

    #[error("bump support radius {support} is not strictly inside the validity radius {validity}")]
    SupportExceedsValidity { support: f64, validity: f64 },

    #[error("local map queried at norm {norm} outside its validity radius {radius}")]
    OutsideValidity { norm: f64, radius: f64 },

    #[error("matrix is not hyperbolic: eigenvalue modulus {modulus} within margin {margin} of 1")]
    NotHyperbolic { modulus: f64, margin: f64 },

    #[error("matrix is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("degree {degree} equation is resonant (sigma_min = {sigma_min:e}); nearest multi-indices {multi_indices:?}")]
    SingularResonance {
        degree: usize,
        sigma_min: f64,
        multi_indices: Vec<Vec<u32>>,
    },

    #[error("contraction series requires spectral radius < 1 (got {spectral_radius})")]
    NotContractive { spectral_radius: f64 },

    #[error("expansion series requires spectral radius of the inverse < 1 (got {spectral_radius})")]
    NotExpansive { spectral_radius: f64 },

    #[error("series did not meet its tail bound after {terms} terms (last tail estimate {tail:e})")]
    SeriesDiverged { terms: usize, tail: f64 },

    #[error("blid bound {bound} must be strictly below the vanishing radius {delta}")]
    BoundViolation { bound: f64, delta: f64 },

    #[error("local solution residual {residual:e} exceeds {limit:e} at {point:?}")]
    LocalResidualTooLarge {
        residual: f64,
        limit: f64,
        point: Vec<f64>,
    },

    #[error("function is not flat at the origin: order-{order} derivative {value:e} along {direction:?}")]
    NotFlat {
        order: usize,
        value: f64,
        direction: Vec<f64>,
    },

    #[error("{0}")]
    InvalidInput(String),
}
