//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("wav error: {0}")]
    Wav(String),

    #[error("audio error: {0}")]
    Audio(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("mining error: {0}")]
    Mining(String),

    #[error("loss error: {0}")]
    Loss(String),

    #[error("augmentation error: {0}")]
    Augment(String),

    #[error("decoder error: {0}")]
    Decode(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("annotation error in {path}, line {line}: {message}")]
    Annotation {
        path: String,
        line: usize,
        message: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
