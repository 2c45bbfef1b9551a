//! Simulation of a quantum-retrieval-game money scheme, a cloning-based
//! sniffing attack on its terminals, and recovery of the bank's secret
//! encoding from the sniffed statistics.
//!
//! Module map:
//!
//! - [`qstate`]: qubit states, the two bases and the eight pair encodings
//! - [`clonesim`]: cloning channel model, event classification, error rates
//! - [`infotheory`]: exact mutual information and trade-off curves
//! - [`mint`]: HMAC keystream token encoding
//! - [`bank`] / [`terminal`] / [`protocol`]: issuing, challenging, answering
//! - [`cracker`]: constraint extraction and salt recovery
//! - [`harness`]: end-to-end experiments

pub mod bank;
pub mod clonesim;
pub mod cracker;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod mint;
pub mod protocol;
pub mod qstate;
pub mod rng;
pub mod terminal;

pub use error::{Error, Result};
