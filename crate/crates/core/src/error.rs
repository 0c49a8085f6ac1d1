use std::io;

use thiserror::Error;

use crate::TokenId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("stream header declares dim 0")]
    ZeroDim,

    #[error("truncated record at index {index}")]
    TruncatedRecord { index: u64 },

    #[error("truncated file")]
    TruncatedFile,

    #[error("non-finite value in record {index}")]
    NonFiniteValue { index: u64 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("zero-norm vector at index {0}")]
    ZeroVector(usize),

    #[error("token {0} not in dictionary")]
    NotInDictionary(TokenId),

    #[error("label {label} out of range for {senses} senses")]
    LabelOutOfRange { label: usize, senses: usize },

    #[error("teacher and feature streams diverge at record {index}")]
    StreamMisaligned { index: usize },

    #[error("no trainable records")]
    EmptyTrainingSet,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Error classes used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    InputFormat,
    Contract,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::BadMagic { .. }
            | Error::UnsupportedVersion(_)
            | Error::UnsupportedDtype(_)
            | Error::ZeroDim
            | Error::TruncatedRecord { .. }
            | Error::TruncatedFile
            | Error::NonFiniteValue { .. }
            | Error::ChecksumMismatch { .. }
            | Error::Malformed(_)
            | Error::Parse { .. }
            | Error::Io(_) => ErrorClass::InputFormat,
            Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::DimMismatch { .. }
            | Error::EmptyInput
            | Error::ZeroVector(_)
            | Error::NotInDictionary(_)
            | Error::LabelOutOfRange { .. }
            | Error::StreamMisaligned { .. }
            | Error::EmptyTrainingSet
            | Error::LengthMismatch(..)
            | Error::DegenerateInput(_) => ErrorClass::Contract,
        }
    }
}
