// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// A declared precondition of an operation does not hold, e.g. running
    /// a factorisability decision on a disturbing phenomenon.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("conditioning on zero-probability settings: {0}")]
    Conditioning(String),
    /// A causal model does not reproduce the phenomenon it was paired with.
    #[error("model does not reproduce phenomenon: {0}")]
    Reproduction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
