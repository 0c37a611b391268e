use thiserror::Error;

use crate::series::SumDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{quantity}: series not converged after {} terms", diagnostics.terms_used)]
    NotConverged {
        quantity: String,
        diagnostics: Box<SumDiagnostics>,
    },

    #[error("{quantity}: fewer than two extrema in {} terms and the Cauchy rule did not hold", diagnostics.terms_used)]
    InsufficientOscillation {
        quantity: String,
        diagnostics: Box<SumDiagnostics>,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("zero table: {0}")]
    ZeroTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Diagnostics carried by a series failure, if any.
    pub fn diagnostics(&self) -> Option<&SumDiagnostics> {
        match self {
            Error::NotConverged { diagnostics, .. }
            | Error::InsufficientOscillation { diagnostics, .. } => Some(diagnostics),
            _ => None,
        }
    }

    /// True for failures caused by bad input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InvalidParams(_))
    }

    pub(crate) fn relabel(self, name: &str) -> Self {
        match self {
            Error::NotConverged { diagnostics, .. } => Error::NotConverged {
                quantity: name.to_string(),
                diagnostics,
            },
            Error::InsufficientOscillation { diagnostics, .. } => Error::InsufficientOscillation {
                quantity: name.to_string(),
                diagnostics,
            },
            other => other,
        }
    }
}
