use std::fmt;

use thiserror::Error;

/// Failures surfaced by the library. Every variant maps to a
/// module-qualified code through [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("resonance: e^(2 pi i n alpha) = 1 at n = {n}")]
    Resonance { n: i64 },

    #[error("frequency n = 0 has no small divisor")]
    ZeroFrequency,

    #[error("invalid rotation number: {0}")]
    InvalidRotation(String),

    #[error("precondition violated in {module}: {message}")]
    Precondition { module: &'static str, message: String },

    #[error("degenerate leading data: {0}")]
    Degenerate(String),

    #[error("truncation exhausted at order {order}")]
    TruncationExhausted { order: usize },

    #[error("missing conjugacy coefficient h_{order}")]
    MissingConjugacy { order: usize },

    #[error("region certification failed: {reason} (witness {witness})")]
    RegionCertification { reason: String, witness: String },

    #[error("orbit produced a non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("epsilon sequence violates eps_n <= (2n)^nu at n = {n} (eps_n = {value})")]
    EpsilonCondition { n: usize, value: f64 },

    #[error("no admissible nu in [{lo}, {hi}] makes sum d_k < delta/2")]
    NoAdmissibleNu { lo: u32, hi: u32 },

    #[error("invalid map spec:\n{}", SpecViolations(.0))]
    InvalidSpec(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

struct SpecViolations<'a>(&'a [String]);

impl fmt::Display for SpecViolations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl Error {
    pub(crate) fn precondition(module: &'static str, message: impl Into<String>) -> Self {
        Error::Precondition {
            module,
            message: message.into(),
        }
    }

    pub fn code(&self) -> String {
        match self {
            Error::Resonance { .. } => "rotation/resonance".into(),
            Error::ZeroFrequency => "rotation/zero-frequency".into(),
            Error::InvalidRotation(_) => "rotation/invalid".into(),
            Error::Precondition { module, .. } => format!("{module}/precondition"),
            Error::Degenerate(_) => "petals/degenerate".into(),
            Error::TruncationExhausted { .. } => "reduction/truncation-exhausted".into(),
            Error::MissingConjugacy { .. } => "reduction/missing-conjugacy".into(),
            Error::RegionCertification { .. } => "petals/region-certification".into(),
            Error::NonFinite { .. } => "dynamics/non-finite".into(),
            Error::EpsilonCondition { .. } => "siegel/epsilon-condition".into(),
            Error::NoAdmissibleNu { .. } => "siegel/no-admissible-nu".into(),
            Error::InvalidSpec(_) => "cli/invalid-spec".into(),
            Error::Io(_) => "cli/io".into(),
            Error::Json(_) => "cli/json".into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
