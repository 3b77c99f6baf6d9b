//! File formats, the lambda-sweep runner and timing utilities built on
//! [`orthofair_core`]. The `orthofair` binary is a thin shell over this crate.

pub mod error;
pub mod experiment;
pub mod io;
pub mod pipeline;

pub use error::{Error, Result};
pub use orthofair_core as core;
