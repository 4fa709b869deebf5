use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient supply: demand {demand} MWh exceeds offered {offered} MWh")]
    InsufficientSupply { demand: f64, offered: f64 },

    #[error("up-balancing exhausted on day {day}, slot {slot}: {uncovered} MWh left uncovered")]
    UpBalancingExhausted {
        day: usize,
        slot: usize,
        uncovered: f64,
    },

    #[error("down-balancing exhausted on day {day}, slot {slot}: {uncovered} MWh left uncovered")]
    DownBalancingExhausted {
        day: usize,
        slot: usize,
        uncovered: f64,
    },

    #[error("ledger of day {day} does not balance: residual {residual} EUR")]
    LedgerImbalance { day: usize, residual: f64 },

    #[error("selection space of {size} combinations exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("user group '{0}' is empty")]
    DegenerateGroup(&'static str),

    #[error("could not parse {key}: {message}")]
    Parse { key: String, message: String },

    #[error("invalid value for '{key}': {message}")]
    Validation { key: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
