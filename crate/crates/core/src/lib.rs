//! Numerical inversion of the modular j-function.

pub mod error;
pub mod mpnum;
pub mod qseries;
pub mod maass;
pub mod hecke;
pub mod forward;
pub mod inverter;
pub mod cli;

pub use error::{Error, Result};
