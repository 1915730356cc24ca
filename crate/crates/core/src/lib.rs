//! Simulator for a five-level Rydberg-atom RF receiver.
//!
//! The pipeline runs from the ladder Hamiltonian and cascade decay
//! ([`quantum`]) through the probe coherence ([`weakprobe`] or the full
//! steady state), Beer–Lambert transmission and spectral readout
//! ([`spectroscopy`]), intrinsic noise ([`noise`]) and finally 8-PAM
//! demodulation and symbol error rates ([`link`]). [`config`] and
//! [`commands`] provide the file format and the command implementations used
//! by the `rydberg` binary.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod constants;
pub mod error;
pub mod exec;
pub mod ladder;
pub mod link;
pub mod noise;
pub mod quantum;
pub mod spectroscopy;
pub mod weakprobe;

pub use error::{Error, ErrorClass, Result};
pub use exec::Execution;
pub use ladder::LadderConfig;
pub use spectroscopy::Engine;
