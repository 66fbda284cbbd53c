//! Locally-optimized reweighted belief propagation (LOW-BP) for LDPC codes.
//!
//! The crate is organised along the decoding pipeline:
//!
//! - [`code`]: parity-check matrices, factor graphs, PEG construction, alist I/O, girth.
//! - [`channel`]: BPSK over AWGN and channel LLRs.
//! - [`decoder`]: the reweighted message-passing engine (standard BP at `rho = 1`).
//! - [`subgraph`]: PEG-style expansion of a factor graph into subgraphs.
//! - [`fap`]: offline optimization of factor appearance probabilities.
//! - [`harness`]: Monte Carlo BER evaluation, offline driver and exports.
//!
//! LLRs use natural logarithms with the convention that positive values favor bit 1.

pub mod channel;
pub mod code;
pub mod decoder;
pub mod error;
pub mod fap;
pub mod harness;
pub mod rng;
pub mod subgraph;

pub use error::{Error, Result};
