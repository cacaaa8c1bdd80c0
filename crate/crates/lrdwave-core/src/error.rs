//! Shared error type for the whole toolkit.
//!
//! Variants are grouped by how the CLI maps them to exit codes:
//! configuration and input problems (exit 2), violated model assumptions
//! (exit 3), and numeric failures such as non-converging quadrature (exit 4).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument is outside the mathematical domain of the operation
    /// (for example the spectral density evaluated at its singularity).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally valid arguments that violate a construction requirement
    /// (non-centered transform, failed quadrature-mirror check, bad config).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data series is too short for the requested filter/scale.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Persisted artifact does not match the expected schema/version.
    #[error("schema error: {0}")]
    Schema(String),

    /// A hypothesis of the asymptotic theory fails for these inputs; the
    /// violated inequality is reported verbatim.
    #[error("assumption violated: {inequality}{}", fmt_detail(.detail))]
    Assumption { inequality: String, detail: String },

    /// The coefficient pattern is outside every supported regime family.
    #[error("unsupported regime: {closest_violation}")]
    UnsupportedRegime { closest_violation: String },

    /// A numeric procedure failed to reach its tolerance.
    #[error("numeric failure in {what}: achieved {achieved:.3e}, required {required:.3e}")]
    Numeric {
        what: String,
        achieved: f64,
        required: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_detail(detail: &str) -> String {
    if detail.is_empty() {
        String::new()
    } else {
        format!(" ({detail})")
    }
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidInput(msg.into())
    }

    pub fn assumption(inequality: impl Into<String>, detail: impl Into<String>) -> Self {
        CoreError::Assumption {
            inequality: inequality.into(),
            detail: detail.into(),
        }
    }

    pub fn numeric(what: impl Into<String>, achieved: f64, required: f64) -> Self {
        CoreError::Numeric {
            what: what.into(),
            achieved,
            required,
        }
    }

    /// Exit-code class used by the CLI: 2 input, 3 assumption, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Domain(_)
            | CoreError::InvalidInput(_)
            | CoreError::InsufficientData(_)
            | CoreError::Schema(_)
            | CoreError::Io(_) => 2,
            CoreError::Assumption { .. } | CoreError::UnsupportedRegime { .. } => 3,
            CoreError::Numeric { .. } => 4,
        }
    }

    /// Short machine-readable kind tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CoreError::Domain(_) => "domain",
            CoreError::InvalidInput(_) => "invalid_input",
            CoreError::InsufficientData(_) => "insufficient_data",
            CoreError::Schema(_) => "schema",
            CoreError::Assumption { .. } => "assumption_violated",
            CoreError::UnsupportedRegime { .. } => "unsupported_regime",
            CoreError::Numeric { .. } => "numeric",
            CoreError::Io(_) => "io",
        }
    }
}
