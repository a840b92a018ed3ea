//! Simulator of an injection-locked laser network used as an Ising machine.
//!
//! Slave lasers injected by a common master and coupled to each other settle
//! at phases `±π/2` relative to the master; the signs encode Ising spins.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod ising;
pub mod locking;
pub mod standing_wave;

pub use error::{Error, Result};
