//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violated an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// WAV container is well-formed but not 16-bit PCM mono.
    #[error("unsupported wav format: {0}")]
    WavFormat(String),

    /// WAV container is damaged or truncated.
    #[error("corrupt wav file: {0}")]
    WavCorrupt(String),

    /// A level or gain operation was asked to work on an all-zero signal.
    #[error("silent signal: {0}")]
    SilentSignal(String),

    /// Segmental SNR has no value because speech and noise share no active frame.
    #[error("segmental SNR undefined: no jointly active frames")]
    UndefinedSnr,

    /// Not enough source material to assemble a clip of the requested duration.
    #[error("insufficient material: {0}")]
    InsufficientMaterial(String),

    /// A test plan cannot be assembled from the given manifests.
    #[error("plan error: {0}")]
    Plan(String),

    /// Input records are inconsistent (unknown ids, unmapped clips, bad rows).
    #[error("data error: {0}")]
    Data(String),

    /// A frame processor crashed or broke the exchange protocol.
    #[error("harness error: {0}")]
    Harness(String),

    /// An external processor withheld output past its declared lookahead.
    #[error("no output frame by exchange {exchange}: processor buffers more than its declared lookahead")]
    CausalityStall { exchange: usize },

    /// Failure while executing one synthesis recipe, tagged with its id.
    #[error("recipe {recipe_id}: {source}")]
    Recipe {
        recipe_id: String,
        #[source]
        source: Box<Error>,
    },

    /// Configuration file could not be read or parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the id of the recipe it occurred in.
    pub fn in_recipe(self, recipe_id: &str) -> Error {
        Error::Recipe {
            recipe_id: recipe_id.to_string(),
            source: Box::new(self),
        }
    }
}
