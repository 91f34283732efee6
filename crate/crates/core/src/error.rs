use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Numbers are carried as `f64` regardless of the working scalar so the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension N={0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("power p={p} lies outside the admissible window ({lo}, {hi}) for N={dim}")]
    OutOfRange { dim: usize, p: f64, lo: f64, hi: f64 },
    #[error("grid: {0}")]
    InvalidGrid(String),
    #[error("field and {what} live on different grids or parameters")]
    Mismatch { what: &'static str },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("ratio {0} outside [0, 1): the dichotomy roots are undefined")]
    RatioOutOfRange(f64),
    #[error("field has zero mass")]
    ZeroMass,
    #[error("rescaling by beta={beta} leaves {points_per_width:.2} points per width (minimum {minimum})")]
    AliasRisk { beta: f64, points_per_width: f64, minimum: f64 },
    #[error("rescaled field lost mass: relative mass error {0:e}")]
    ResampleLoss(f64),
    #[error("expected a one-dimensional problem, got N={0}")]
    WrongDimension(usize),
    #[error("grid too coarse: {points_across:.1} points across the soliton half-maximum (need {required})")]
    GridTooCoarse { points_across: f64, required: f64 },
    #[error("no convergence after {iterations} iterations (change {change:e}, residual {residual:e})")]
    NoConvergence { iterations: usize, change: f64, residual: f64 },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("mass outside the half-box is {fraction:e} of the total (limit {limit:e})")]
    BoundaryMass { fraction: f64, limit: f64 },
    #[error("data is not in the second dichotomy case: {0}")]
    NotCase2(String),
    #[error("virial denominator {0} is not positive")]
    NegativeDenominator(f64),
    #[error("cutoff radius {radius} does not fit: 2R must be at most {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },
    #[error("radius {radius} is below the admissible minimum {minimum}")]
    RadiusTooSmall { radius: f64, minimum: f64 },
    #[error("gamma={gamma} outside the admissible window (0, {gamma_max})")]
    GammaOutOfWindow { gamma: f64, gamma_max: f64 },
    #[error("lambda={0} must exceed 1")]
    LambdaNotSupercritical(f64),
    #[error("field is not radial (relative asymmetry {0:e})")]
    NotRadial(f64),
    #[error("mass {mass} differs from the ground-state mass {target}")]
    MassMismatch { mass: f64, target: f64 },
    #[error("rescaled soliton is unresolved: {cells:.2} grid cells across its half-maximum (need 4)")]
    ScaleUnresolvable { cells: f64 },
    #[error("ground-state file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
