//! Error type shared by the whole toolkit.

use thiserror::Error;

/// Everything that can go wrong when building grids, evaluating norms, or
/// running the solvers. Variants carry enough context (index, value, path)
/// to point at the offending sample.
#[derive(Debug, Error)]
pub enum WpcError {
    #[error("nonpositive half-width {0}")]
    NonpositiveHalfWidth(f64),

    #[error("interval count {0} must be even and at least 16")]
    BadIntervalCount(usize),

    #[error("circle node count {0} must be a power of two and at least 16")]
    BadCircleCount(usize),

    #[error("value count {got} does not match grid node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("operation requires a line grid")]
    LineGridRequired,

    #[error("operation requires a circle grid")]
    CircleGridRequired,

    #[error("not monotone at {0}")]
    NotMonotone(usize),

    #[error("tail slope {0} must be positive and finite")]
    BadTailSlope(f64),

    #[error("exponent p = {0} out of range: {1}")]
    BadExponent(f64, &'static str),

    #[error("input has a nonzero imaginary part (max {0:.3e}); a real-valued function is required")]
    NotReal(f64),

    #[error("scale {scale} is below two grid spacings ({spacing})")]
    ScaleUnresolvable { scale: f64, spacing: f64 },

    #[error("weight degenerate at {index}: sample {value:.3e} is below the floor {floor:.3e}")]
    DegenerateWeight { index: usize, value: f64, floor: f64 },

    #[error("derivative vanishes at {0}: |increment| below 1e-13 * spacing")]
    VanishingIncrement(usize),

    #[error("normalization integral has modulus {0:.3e}; log is ill-conditioned")]
    DegenerateNormalization(f64),

    #[error("window [{lo}, {hi}] must contain [0, 1]")]
    WindowExcludesUnitInterval { lo: f64, hi: f64 },

    #[error("series is locally non-univalent at 0 (leading coefficient modulus {0:.3e})")]
    NonUnivalent(f64),

    #[error("series degree {0} is too small: {1}")]
    DegreeTooSmall(usize, &'static str),

    #[error("series coefficients grew beyond 1e12 during composition (max {0:.3e})")]
    CoefficientOverflow(f64),

    #[error("norm divergent at cutoff: level values {prev:.6e} -> {next:.6e} grew more than 10%")]
    DivergentAtCutoff { prev: f64, next: f64 },

    #[error("dilatation modulus {value} at ({i}, {j}) reaches the unit bound (margin 1e-9)")]
    DilatationBound { value: f64, i: usize, j: usize },

    #[error("jet dilatation disagrees with the supplied field at ({i}, {j}): |defect| = {defect:.3e}")]
    JetMismatch { i: usize, j: usize, defect: f64 },

    #[error("composition denominator modulus {0:.3e} below 1e-9")]
    SmallDenominator(f64),

    #[error("orientation violated at ({i}, {j}): |dH/dzbar| = {anti:.3e} >= |dH/dz| = {holo:.3e}")]
    OrientationViolation { i: usize, j: usize, anti: f64, holo: f64 },

    #[error("y levels must be strictly increasing and positive")]
    BadYLevels,

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, WpcError>;
