//! Monte-Carlo link simulator for non-binary LDPC coded large-MIMO systems,
//! built on [`nbmimo_core`].

pub mod capacity;
pub mod codefile;
pub mod config;
mod error;
pub mod sweep;

pub use error::{Result, SimError};
pub use nbmimo_core as core;
