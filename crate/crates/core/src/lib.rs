//! Approximate quantum error correction for subsystem codes.
//!
//! The crate provides dense operator algebra, Kraus channels, subsystem codes
//! `H = H_A ⊗ H_B ⊕ K`, transpose-channel recovery, fidelity-loss estimators
//! and bound scenarios that compare a recovery against the optimal one.

pub mod channel;
pub mod code;
pub mod error;
pub mod fidelity;
pub mod operator;
pub mod random;
pub mod recovery;
pub mod report;
pub mod scenarios;

pub use channel::{ChoiMatrix, KrausChannel};
pub use code::{CodeState, StateFamily, SubsystemCode};
pub use error::{Error, Result};
pub use operator::{Operator, C64};
pub use report::{BoundReport, ScenarioOutcome};
