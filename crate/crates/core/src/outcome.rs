use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Machine-readable reason attached to a metric that could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NotApplicable,
    InsufficientData,
    InvalidConfig,
    SchemaMismatch,
    NoConvergence,
    NumericalFailure,
    Io,
}

/// A metric value, or the reason it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok { value: T },
    Skipped { reason: SkipReason, detail: String },
}

impl<T> Outcome<T> {
    pub fn ok(value: T) -> Self {
        Outcome::Ok { value }
    }

    pub fn skipped(reason: SkipReason, detail: impl Into<String>) -> Self {
        Outcome::Skipped {
            reason,
            detail: detail.into(),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Ok { value } => Some(value),
            Outcome::Skipped { .. } => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok { .. })
    }

    pub fn from_error(e: &Error) -> Self {
        Outcome::skipped(reason_for(e), e.to_string())
    }

    /// Applies `f` to a borrowed result, keeping a failure as a skip.
    pub fn from_ref<U>(r: &crate::Result<U>, f: impl FnOnce(&U) -> crate::Result<T>) -> Self {
        match r {
            Ok(v) => f(v).into(),
            Err(e) => Outcome::from_error(e),
        }
    }
}

impl<T> From<crate::Result<T>> for Outcome<T> {
    fn from(r: crate::Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::ok(v),
            Err(e) => Outcome::from_error(&e),
        }
    }
}

pub fn reason_for(e: &Error) -> SkipReason {
    match e {
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => SkipReason::Io,
        Error::RaggedRow { .. } | Error::NumericParse { .. } | Error::SchemaMismatch(_) => {
            SkipReason::SchemaMismatch
        }
        Error::EmptyTable | Error::InsufficientData(_) => SkipReason::InsufficientData,
        Error::UnknownColumn(_) | Error::InvalidArgument(_) => SkipReason::InvalidConfig,
        Error::WrongKind { .. } => SkipReason::NotApplicable,
        Error::NoConvergence { .. } => SkipReason::NoConvergence,
        Error::Numerical(_) => SkipReason::NumericalFailure,
    }
}
