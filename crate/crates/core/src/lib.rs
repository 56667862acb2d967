//! Quantum dynamics over graphs whose vertices carry names.

pub mod checks;
pub mod cli_formats;
pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod hilbert;
pub mod names;
pub mod restrict;
pub mod tensor_trace;

pub use error::{QnetError, Result};
