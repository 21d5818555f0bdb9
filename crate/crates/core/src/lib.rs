//! Polar codes, list successive-cancellation decoding, and a cycle-accurate
//! model of a list decoder that time-multiplexes all list paths through a
//! single pipelined SC decoder.
//!
//! Bit ordering is natural (no bit-reversal permutation) everywhere: bit `i`
//! of the message word is row `i` of `F^{⊗m}`.

pub mod channel;
pub mod efficiency;
pub mod error;
pub mod fastssc;
pub mod latency_models;
pub mod list_decoder;
pub mod overlap_sim;
pub mod polar_code;
pub mod sc_kernel;

pub use error::{Error, Result};
pub use polar_code::{CodeConfig, Codeword, MessageWord};
