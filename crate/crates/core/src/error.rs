use thiserror::Error;

/// Everything that can go wrong in the engine.
///
/// Input problems (bad files, unknown strata, mismatched shapes) are kept
/// apart from property violations so the CLI can map them to distinct exit
/// codes; see [`Error::is_input_error`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("not a subspace: {0}")]
    NotASubspace(String),

    #[error("not a cochain complex: d∘d ≠ 0 at degree {degree}")]
    NotAComplex { degree: i32 },

    #[error("short exact sequence hypothesis fails at degree {degree}: {reason}")]
    NotExact { degree: i32, reason: String },

    #[error("unknown stratum `{0}`")]
    UnknownStratum(String),

    #[error("perversities are defined on different strata: {0}")]
    StrataMismatch(String),

    #[error("no Gysin witness for a class in degree {degree}")]
    WitnessNotFound { degree: i32 },

    #[error("connecting map does not decompose as eub⊗1 + I⊗u at total degree {degree}")]
    DecompositionMismatch { degree: i32 },

    #[error("truncation bound {nu} too small: {reason}")]
    TruncationTooSmall { nu: usize, reason: String },

    #[error("property violation at {location}: {detail}")]
    PropertyViolation { location: String, detail: String },

    #[error("matrix mismatch at {location}: engine {engine} vs formula {formula}")]
    Mismatch { location: String, engine: String, formula: String },

    #[error("model is outside the Skjelbred hypotheses: {0}")]
    IdentificationFails(String),

    #[error("not a cone model: {0}")]
    NotAConeModel(String),

    #[error("invalid model isomorphism: {0}")]
    InvalidIso(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input rather than
    /// a failed mathematical check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownStratum(_)
                | Error::StrataMismatch(_)
                | Error::InvalidModel(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::AmbientMismatch { .. }
                | Error::NotAConeModel(_)
                | Error::InvalidIso(_)
                | Error::Precondition(_)
                | Error::IdentificationFails(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
