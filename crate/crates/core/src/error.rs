use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or value fell outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Content reaches the container rim at the requested tilt.
    #[error("content spills at tilt {theta_deg:.2} deg (fill height {fill_height_mm:.2} mm)")]
    Spill { theta_deg: f64, fill_height_mm: f64 },

    /// Force readings imply a negative content mass.
    #[error("inconsistent readings: estimated mass {0:.4} g is negative")]
    NegativeMass(f64),

    /// A persisted model, trace or dataset could not be parsed.
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }
}
