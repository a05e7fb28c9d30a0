use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown model `{0}` (expected heisenberg, heisenberg-quotient or s3)")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frame (X, Y) is degenerate at chart {chart} point {coords:?}")]
    DegenerateFrame { chart: u8, coords: [f64; 3] },
    #[error("contact condition violated: Reeb system is singular at {0:?}")]
    SingularReebSystem([f64; 3]),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("maximum number of integrator steps exceeded at t = {t}")]
    TooManySteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("left chart {chart} and no transition is available")]
    ChartExit { chart: u8 },
    #[error("characteristic initial data: covector annihilates the distribution (g* = {0})")]
    CharacteristicData(f64),
    #[error("h_Z = {0} is not positive (wrong cone)")]
    WrongCone(f64),
    #[error("asymptotic regime guard violated: h0 = {0} < 5")]
    RegimeGuard(f64),
    #[error("time {t} exceeds the prediction horizon {max}")]
    HorizonExceeded { t: f64, max: f64 },
    #[error("prediction undefined: 1 - j·alpha0/(2kπ) = {0} is not positive")]
    NonPositiveDiscriminant(f64),
    #[error("orbit has no period")]
    MissingPeriod,
    #[error("transported frame failed to return to D(start): mismatch {0}")]
    MonodromyMismatch(f64),
    #[error("spiral calibration failed: {0}")]
    Calibration(String),
    #[error("polynomial has nonzero circle average and is not in the range of A")]
    NotInRange,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

pub type Result<T> = core::result::Result<T, Error>;
