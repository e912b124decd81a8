use std::path::PathBuf;

use crate::label::ProtocolLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown protocol {0:?} (expected one of vegas, reno, cubic, bbr)")]
    UnknownProtocol(String),

    #[error("label {0} empty")]
    EmptyLabel(ProtocolLabel),

    #[error("class {label} has {count} samples, at least {min} are needed to realise the split ratios")]
    TooFewSamples {
        label: ProtocolLabel,
        count: usize,
        min: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite activation in layer {layer} ({direction}) at step {step}")]
    NonFiniteActivation {
        layer: usize,
        direction: &'static str,
        step: usize,
    },

    #[error("non-finite value in tensor {0}")]
    NonFiniteTensor(String),

    #[error("label index {0} out of range (0..4)")]
    LabelOutOfRange(usize),

    #[error("epoch {epoch}, batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
