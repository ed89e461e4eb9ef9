// SPDX-License-Identifier: Apache-2.0

//! Lower bounds on phase-estimation precision for `N` uses of a noisy
//! quantum channel.
//!
//! Two bounds with `1/√N` scaling are provided, both computed from the
//! channel's Kraus operators and their φ-derivatives at a single point:
//!
//! * [`cs`]: the classical-simulation bound, from how far the Choi matrix can
//!   be pushed along its tangent in both directions before leaving the cone
//!   of channels;
//! * [`ce`]: the channel-extension bound `F_N ≤ 4N·min‖α‖`, found by a
//!   semidefinite program over Kraus-rotation generators.
//!
//! [`qfi`] searches pure inputs for the quantum Fisher information actually
//! reachable at small `N`, which the bounds must never undercut.

pub mod ce;
pub mod channel;
pub mod cs;
pub mod error;
pub mod json;
pub mod linalg;
pub mod models;
pub mod qfi;
pub mod random;
pub mod sweep;

pub use ce::{ce_sdp_bound, CeResult, HMatrix};
pub use channel::{Channel, ChoiPair, DensityMatrix, Tolerances, DEFAULT_BUDGET};
pub use cs::{cs_bound, CsResult};
pub use error::{Error, Result};
pub use qfi::{optimize_input, qfi, OracleResult};
