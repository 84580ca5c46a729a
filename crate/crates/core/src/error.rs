use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("invalid ring definition: {0}")]
    InvalidRing(String),

    #[error("ring is not integral: {0}")]
    NotIntegral(String),

    #[error("modules live over different rings (`{0}` vs `{1}`)")]
    RingMismatch(String, String),

    #[error("malformed module: {0}")]
    MalformedModule(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("relabeling {0} <-> {1} is not a ring automorphism")]
    NotAnAutomorphism(String, String),

    #[error("invalid solve plan: {0}")]
    InvalidPlan(String),

    #[error("no diagonal identity bounds the unknowns of stage `{0}`")]
    UnboundedSearch(String),

    #[error("rank {rank} exceeds the configured cap {cap}")]
    RankTooLarge { rank: usize, cap: usize },

    #[error("solver emitted a module that fails verification: {0}")]
    SolverBug(String),

    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),

    #[error("{n} does not divide conductor {conductor}")]
    NotADivisor { n: u32, conductor: u32 },

    #[error("cannot parse expression `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("value is not rational: {0}")]
    NotRational(String),

    #[error("non-integral or negative multiplicity {value} ({context})")]
    NonIntegralMultiplicity { value: String, context: String },

    #[error("product leaves the spin span ({0})")]
    SpinClosureViolation(String),

    #[error("unmapped class `{0}`")]
    UnmappedClass(String),

    #[error("invalid character table `{table}`: {reason}")]
    InvalidTable { table: String, reason: String },

    #[error("invalid embedding `{embedding}`: {reason}")]
    InvalidEmbedding { embedding: String, reason: String },

    #[error("invalid projective data `{data}`: {reason}")]
    InvalidProjective { data: String, reason: String },

    #[error("cross-check mismatch: {0}")]
    CrossCheck(String),

    #[error("missing required catalog file `{0}`")]
    MissingFile(String),

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse `{path}`: {reason}")]
    FileFormat { path: String, reason: String },

    #[error("catalog validation failed in `{file}`: {reason}")]
    Validation { file: String, reason: String },
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// True when the error comes from reading or decoding input rather than from a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MissingFile(_) | Error::Io { .. } | Error::FileFormat { .. } | Error::Parse { .. }
        )
    }
}
