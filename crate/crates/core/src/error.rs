use thiserror::Error;

pub type Result<T> = std::result::Result<T, TwinError>;

/// Every failure the twin can report. Messages are single-line so the CLI
/// can forward them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwinError {
    #[error("{quantity} = {value} is outside the valid interval [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid {quantity}: {reason}")]
    Invalid {
        quantity: &'static str,
        reason: String,
    },

    #[error("{0} is undefined (division by zero)")]
    DivisionByZero(&'static str),

    #[error("singular linkage configuration: {factor} is within 1e-9 of zero")]
    Singular { factor: &'static str },

    #[error("rank-deficient fit: {distinct} distinct voltages cannot determine a degree-{degree} polynomial")]
    RankDeficient { distinct: usize, degree: usize },

    #[error("sampling rate {rate} Hz must exceed {required} Hz")]
    Nyquist { rate: f64, required: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<TwinError>,
    },
}

impl TwinError {
    pub fn invalid(quantity: &'static str, reason: impl Into<String>) -> Self {
        TwinError::Invalid {
            quantity,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        TwinError::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for TwinError {
    fn from(e: std::io::Error) -> Self {
        TwinError::Io(e.to_string())
    }
}

/// Checks `lo <= value <= hi`, rejecting NaN.
pub(crate) fn check_range(quantity: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(TwinError::OutOfRange {
            quantity,
            value,
            min: lo,
            max: hi,
        });
    }
    Ok(())
}

pub(crate) fn check_positive(quantity: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(TwinError::invalid(quantity, format!("must be positive and finite, got {value}")));
    }
    Ok(())
}
