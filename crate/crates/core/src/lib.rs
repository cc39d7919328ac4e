//! Simulation and verification toolkit for a classical particle coupled to a
//! Bose gas in the Bogoliubov limit.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod angular;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod friction;
pub mod grid;
pub mod invariants;
pub mod output;
pub mod potential;
pub mod quad;
pub mod soliton;
pub mod spectral;
pub mod stats;
pub mod sum;

pub use error::{Error, ErrorFamily, Result};
