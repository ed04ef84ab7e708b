use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("infeasible geometry: (M-1)*d_min = {required} exceeds span L = {span}")]
    InfeasibleGeometry { required: f64, span: f64 },

    #[error("pattern infeasible: {0}")]
    InfeasiblePattern(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("ellipsoid collapsed: g'Bg = {0:e}")]
    EllipsoidCollapse(f64),

    #[error("pattern unreachable with zero moving speed")]
    Unreachable,

    #[error("coupling violation: track distance {distance} below d_min {d_min} at t = {time}")]
    CouplingViolation { distance: f64, d_min: f64, time: f64 },

    #[error("invalid linear program: {0}")]
    LinearProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
