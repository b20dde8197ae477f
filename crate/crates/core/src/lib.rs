//! Negative-imaginary (NI) systems: classification, feedback stability
//! certificates, and synthesis of destabilizing plants for controllers that
//! fail a robust-stability condition.

pub mod classify;
pub mod cli;
pub mod converse;
pub mod error;
pub mod json;
pub mod poly;
pub mod rational;
pub mod realization;
pub mod sampler;
pub mod spectral;
pub mod stability;
pub mod tfm;

pub use error::{Error, Result};
pub use rational::RationalFunction;
pub use tfm::{CMatrix, RMatrix, TransferMatrix};
