use thiserror::Error;

/// Errors raised while loading data files or running the analysis pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown handshape `{0}`")]
    UnknownHandshape(String),

    #[error("duplicate handshape label `{0}`")]
    DuplicateHandshape(String),

    #[error("inventory holds {size} handshapes, above the cap of {cap}")]
    InventoryTooLarge { size: usize, cap: usize },

    #[error("unknown gloss `{0}`")]
    UnknownGloss(String),

    #[error("duplicate gloss `{0}`")]
    DuplicateGloss(String),

    #[error("entry `{gloss}`: {message}")]
    Structure { gloss: String, message: String },

    #[error("utterance `{utterance}`: {message}")]
    Corpus { utterance: String, message: String },

    #[error("row `{start}`: end counts sum to {sum} but the start total is {total}")]
    RowSum { start: String, sum: u64, total: u64 },

    #[error("stats file was built for {file} handshapes but the inventory holds {inventory}")]
    InventorySizeMismatch { file: usize, inventory: usize },

    #[error("joint prior is undefined for an empty table without smoothing")]
    UndefinedPrior,

    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("non-dominant scores vanish after masking to the unmarked set")]
    DegenerateMask,

    #[error("pooling needs a two-handed sign type, got {0}")]
    NotTwoHanded(String),

    #[error("cannot classify `{gloss}`: {reason}")]
    IllFormed { gloss: String, reason: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
