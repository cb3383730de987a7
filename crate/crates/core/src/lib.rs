//! Variational quantum neural networks on a dense statevector.
//!
//! The crate is `no_std` (it needs `alloc`) and carries everything that is
//! pure computation: the simulator, the circuit IR with its builders, model
//! evaluation and losses, the three optimizers, and the seeded dataset
//! generators. File formats and the command line live in the `eqnn` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod circuit;
pub mod data;
mod error;
mod math;
pub mod optim;
pub mod qnn;
pub mod statevector;

pub use error::{Error, Result};
