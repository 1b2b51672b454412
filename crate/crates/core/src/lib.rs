//! Quantum secret sharing from normal-form monotone span programs.
//!
//! - [`field`]: exact linear algebra over prime fields.
//! - [`access`]: access structures, duals, classification, purification.
//! - [`msp`]: monotone span programs and the normal-form construction.
//! - [`entropy`]: subset entropies from matrix ranks and the monotonicity checks.
//! - [`oracle`]: dense state-vector simulation used as independent ground truth.
//! - [`cli`]: the `qss` command-line front end.

pub mod access;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod field;
pub mod msp;
pub mod oracle;

pub use access::{AccessStructure, PlayerSet, StructureClassification};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldMatrix, FieldVector, PrimeField};
