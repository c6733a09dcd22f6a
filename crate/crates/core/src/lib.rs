//! Universal context-tree prediction of individual binary sequences.
//!
//! - [`seq`]: sequences, words, suffix occurrence counts.
//! - [`predictor`]: the randomized output function, reference machines,
//!   fixed-state predictors and hindsight error.
//! - [`universal`]: the growing-context universal predictor.
//! - [`oracle`]: bracketing the S-state context predictability.
//! - [`adversary`]: self-generating chain machines and the ensemble bound.
//! - [`bounds`]: closed-form redundancy bounds.
//! - [`harness`]: generators, experiment configs and sweep reports.

pub mod adversary;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod harness;
pub mod oracle;
pub mod predictor;
pub mod seq;
pub mod universal;

pub use error::{Error, Result};
pub use seq::{BinarySequence, Bit, Word};
