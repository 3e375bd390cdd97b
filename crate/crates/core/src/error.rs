use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("not hyperbolic: |trace| = {trace:.6} <= 2")]
    NotHyperbolic { trace: f64 },

    #[error("chart requires pure Möbius generator")]
    ChartRequiresPureMobius,

    #[error("degenerate arc: length {0} outside (0, 1)")]
    DegenerateArc(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid step distribution: {0}")]
    InvalidDistribution(String),

    #[error("exact convolution requires integer matrices")]
    NonIntegerGenerators,

    #[error("convolution memory budget exceeded at n = {attempted}; largest feasible n is {largest_feasible}")]
    HorizonExceeded {
        attempted: usize,
        largest_feasible: usize,
    },

    #[error("stationary iteration stalled: residual {residual:.3e} after {iterations} iterations")]
    NotStationary { residual: f64, iterations: usize },

    #[error("Lyapunov estimators disagree: integral {integral:.6} vs pathwise {pathwise:.6} ({sigmas:.1} sigma)")]
    LyapunovDisagreement {
        integral: f64,
        pathwise: f64,
        sigmas: f64,
    },

    #[error("measure gap: zero-mass window around x = {x:.6}")]
    MeasureGap { x: f64 },

    #[error("{percent:.1}% of samples hit measure gaps; increase delta")]
    TooManyGaps { percent: f64 },

    #[error("constants require negative exponent, got lambda = {0}")]
    NonNegativeExponent(f64),

    #[error("pole of step {step} entered the disk image")]
    PoleInDisk { step: usize },

    #[error("interval too large for distortion control: gap^tau * tau * e = {value:.6} >= 1")]
    IntervalTooLarge { value: f64 },

    #[error("projective blow-up inside domain at y = {0}")]
    ProjectiveBlowUp(f64),

    #[error("arc escapes the domain of the map")]
    DomainEscape,

    #[error("endgame inequality failed: {0}")]
    EndgameViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that come from user input rather than from an estimator.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidGenerator(_)
                | Error::InvalidDistribution(_)
                | Error::InvalidArgument(_)
                | Error::DegenerateArc(_)
                | Error::NotHyperbolic { .. }
                | Error::ChartRequiresPureMobius
        )
    }
}
