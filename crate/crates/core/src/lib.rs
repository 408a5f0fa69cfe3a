//! Building blocks for a non-binary LDPC coded spatial-multiplexing MIMO link.
//!
//! The chain modelled here is
//!
//! ```text
//! info symbols -> GF(2^m) LDPC encoder -> Gray mapper -> Rayleigh MIMO channel
//!              -> MMSE soft detector -> FFT-domain belief propagation -> info symbols
//! ```
//!
//! Everything in this crate is `no_std` (with `alloc`). File formats, the
//! command line and multi-threaded sweeps live in the companion `nbmimo` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod capacity;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod detector;
mod error;
pub mod galois;
pub mod link;
pub mod modem;

pub use error::{Error, Result};
pub use galois::{FieldTable, GfSymbol};

/// Complex baseband sample type used throughout the link.
pub type Complex = num_complex::Complex<f64>;
