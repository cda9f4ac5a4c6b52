// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Infeasible,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{n} vertices exceeds the exhaustive-search cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("bitstring length {got} does not match {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} ns outside waveform duration [0, {duration}] ns")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("embedding infeasible: {0}")]
    Infeasible(String),

    #[error("no collision-free quantum link between `{u}` and `{v}`")]
    Routing { u: String, v: String },

    #[error("inconsistent pose: {0}")]
    Pose(String),

    #[error("norm drift {drift:.3e} after evolution; reduce the time step (dt = {dt} ns)")]
    StepSize { drift: f64, dt: f64 },

    #[error("non-finite loss at epoch {epoch} (last finite loss {last_loss:.4e})")]
    NonFiniteLoss { epoch: usize, last_loss: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Infeasible(_) | Error::Routing { .. } => ErrorKind::Infeasible,
            Error::StepSize { .. } | Error::NonFiniteLoss { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
