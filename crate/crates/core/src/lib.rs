//! Hybrid quantum-classical reinforcement learning for two-stage unit
//! commitment.
//!
//! The crate is `no_std` with `alloc`. It contains the statevector
//! simulator ([`qsim`]), the hybrid function approximators ([`qmodels`]),
//! the linearized power-system model ([`grid`]), the day-ahead and
//! real-time environments ([`envs`]), the learning algorithms ([`rl`]) and
//! the exact references used to verify them ([`oracle`]). File formats and
//! the command-line harness live in the `qcommit` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod envs;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod params;
pub mod qmodels;
pub mod qsim;
pub mod rl;

pub use error::{Error, Result};
