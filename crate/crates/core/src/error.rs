// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A channel or Choi pair failed one of its invariants.
    #[error("validation failed: {what} (defect {defect:.3e})")]
    Validation { what: String, defect: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    /// Malformed or schema-violating document.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A tensor power would exceed the configured dense-entry budget.
    #[error("resource limit: {required} complex entries needed, budget is {limit}")]
    Budget { required: u128, limit: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Two routes that must agree did not.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
