use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage an error surfaced in. Used to label errors that cross stage
/// boundaries and to pick the CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Rotation,
    Transform,
    Detection,
    ZeroCrossing,
    SourceImpedance,
    Loading,
    InceptionAngle,
    FaultResistance,
    Selection,
    Training,
    Baseline,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Input => "input",
            Stage::Rotation => "phase rotation",
            Stage::Transform => "clarke transform",
            Stage::Detection => "fault detection",
            Stage::ZeroCrossing => "zero crossing",
            Stage::SourceImpedance => "source impedance",
            Stage::Loading => "loading condition",
            Stage::InceptionAngle => "inception angle",
            Stage::FaultResistance => "fault resistance range",
            Stage::Selection => "target selection",
            Stage::Training => "training",
            Stage::Baseline => "baseline",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("unsupported COMTRADE revision: {0}")]
    UnsupportedVersion(String),

    #[error("channel identification failed: {0}")]
    Channel(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("sample rate {rate} Hz too low for target {target} Hz (needs at least {required} Hz)")]
    RateTooLow {
        rate: f64,
        target: f64,
        required: f64,
    },

    #[error("window error: need {needed} samples {side} the fault, only {available} available")]
    Window {
        side: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("no fault detected (no derivative sample exceeds the threshold)")]
    NoFaultDetected,

    #[error("no rising zero crossing found before index {before}")]
    NoZeroCrossing { before: usize },

    #[error("index out of bounds: {0}")]
    OutOfBounds(String),

    #[error("unknown fault type '{0}'")]
    UnknownFaultType(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("least squares ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("terminal voltage phasor too small ({magnitude:.3e}, nominal {nominal:.3e})")]
    NoVoltage { magnitude: f64, nominal: f64 },

    #[error("fault inception ordering violated: t_f={t_f}, t_0={t_0}")]
    Ordering { t_f: f64, t_0: f64 },

    #[error("no fault resistance satisfies the current bounds [{lower:.1}, {upper:.1}] A; nearest miss {nearest:.1} A at R_f={nearest_rf:.3} ohm, l_f={nearest_lf:.1} km")]
    RangeNotFound {
        lower: f64,
        upper: f64,
        nearest: f64,
        nearest_rf: f64,
        nearest_lf: f64,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("simulation failed: {reason} (spec: {spec})")]
    SimulationFailed { reason: String, spec: String },

    #[error("group generation failed: {0}")]
    GroupGeneration(String),

    #[error("selection error: {0}")]
    Selection(String),

    #[error("dataset too small: {0}")]
    DatasetTooSmall(String),

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("{failed} of {total} training runs diverged")]
    TooManyDivergent { failed: usize, total: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("indeterminate result: {0}")]
    Indeterminate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// Process exit code: 2 input error, 3 estimation failure, 4 training failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { stage, source } => match stage {
                Stage::Input | Stage::Rotation => 2,
                Stage::Training | Stage::Baseline => 4,
                Stage::Selection => source.exit_code().max(3),
                _ => 3,
            },
            Error::Divergence { .. } | Error::TooManyDivergent { .. } => 4,
            Error::DatasetTooSmall(_) => 4,
            Error::NoFaultDetected
            | Error::NoZeroCrossing { .. }
            | Error::IllConditioned { .. }
            | Error::EstimationFailed(_)
            | Error::NoVoltage { .. }
            | Error::Ordering { .. }
            | Error::RangeNotFound { .. }
            | Error::Selection(_)
            | Error::Indeterminate(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
