//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Loop orders above 2 need a stabilizing denominator polynomial in the
    /// noise transfer function, which this crate does not design.
    #[error(
        "unsupported modulator order {0}: orders above 2 require a stabilizing \
         denominator polynomial; only orders 1 and 2 (denominator = 1) are implemented"
    )]
    UnsupportedOrder(usize),

    /// The quantizer saw a non-finite value, which means the loop diverged.
    #[error("non-finite quantizer input {value} at sample {index}: modulator state diverged")]
    NumericState { index: usize, value: f64 },

    #[error("jitter sigma {sigma} is not below a quarter period ({limit}); edges could reorder")]
    JitterTooLarge { sigma: f64, limit: f64 },

    #[error("clock has {edges} edges but {symbols} symbols need {required}")]
    EdgeCountMismatch {
        edges: usize,
        symbols: usize,
        required: usize,
    },

    #[error("bank streams have unequal lengths {0:?}")]
    RaggedBank(Vec<usize>),

    #[error("input too short: {len} samples, need at least {min}")]
    InputTooShort { len: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
