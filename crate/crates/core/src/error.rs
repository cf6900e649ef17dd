use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Each variant maps to a stable, module-qualified code via [`Error::code`],
/// which is what the CLI prints and what the C API translates into status
/// values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("at least 2 studies are required, found {found}")]
    InsufficientStudies { found: usize },

    #[error("{what} must be a finite value > 0, got {value}")]
    InvalidVariance { what: &'static str, value: f64 },

    #[error("{what} must be a finite value > 0, got {value}")]
    InvalidSampleSize { what: &'static str, value: f64 },

    #[error("{what} must be finite and >= 0, got {value}")]
    InvalidStatistic { what: &'static str, value: f64 },

    #[error("weights are degenerate: sum(w) - sum(w^2)/sum(w) = {denominator} is not positive")]
    DegenerateWeights { denominator: f64 },

    #[error("adjusted mean size must be >= 1, got {value}")]
    InvalidAdjustedSize { value: f64 },

    #[error("{what}: within-group degrees of freedom must be positive")]
    InsufficientDegreesOfFreedom { what: &'static str },

    #[error("mean-difference datasets need per-arm detail to compute MSW")]
    MissingArmDetail,

    #[error("invalid study: {reason}")]
    InvalidStudy { reason: String },

    #[error("pooled standard deviation is zero")]
    DegenerateVariance,

    #[error("effect size must be finite, got {value}")]
    InvalidEffect { value: f64 },

    #[error("simulated studies need at least 2 observations per group, got {n}")]
    InsufficientSample { n: u64 },

    #[error("invalid simulation config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("dataset kind {found} cannot be used here (expected {expected})")]
    KindMismatch { expected: &'static str, found: &'static str },

    #[error("missing column `{column}` (expected header `{expected}`)")]
    MissingColumn { column: String, expected: &'static str },

    #[error("unexpected column `{column}` (expected header `{expected}`)")]
    UnexpectedColumn { column: String, expected: &'static str },

    #[error("{message}")]
    Parse { message: String },

    #[error("row {row}: {source}")]
    Row { row: usize, source: Box<Error> },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable identifier of the form `<module>.<condition>`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InsufficientStudies { .. } => "model.insufficient_studies",
            Error::InvalidVariance { .. } => "model.invalid_variance",
            Error::InvalidSampleSize { .. } => "model.invalid_sample_size",
            Error::InvalidStatistic { .. } => "model.invalid_statistic",
            Error::DegenerateWeights { .. } => "model.degenerate_weights",
            Error::InvalidAdjustedSize { .. } => "model.invalid_adjusted_size",
            Error::InsufficientDegreesOfFreedom { .. } => "model.insufficient_df",
            Error::MissingArmDetail => "model.missing_arm_detail",
            Error::InvalidStudy { .. } => "effects.invalid_study",
            Error::DegenerateVariance => "effects.degenerate_variance",
            Error::InvalidEffect { .. } => "effects.invalid_effect",
            Error::InsufficientSample { .. } => "simulation.insufficient_sample",
            Error::InvalidConfig { .. } => "simulation.invalid_config",
            Error::KindMismatch { .. } => "io.kind_mismatch",
            Error::MissingColumn { .. } | Error::UnexpectedColumn { .. } => "io.schema",
            Error::Parse { .. } => "io.parse",
            Error::Row { source, .. } => source.code(),
            Error::Io { .. } => "io.read",
        }
    }

    /// Strips any [`Error::Row`] wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::Row { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at_row(self, row: usize) -> Error {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }
}
