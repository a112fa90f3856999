use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class index {index} out of range for a source with {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },

    /// The two class images overlap completely, so no kernel can separate them.
    #[error(
        "design impossible for classes ({}, {}): no non-overlapping dimensions (NO_Dim = {no_dim})",
        .pair.0 + 1, .pair.1 + 1
    )]
    DesignImpossible { pair: (usize, usize), no_dim: usize },

    #[error("design loop removed every row while the stacked rank still exceeded the budget M = {budget}")]
    EmptyDesign { budget: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
