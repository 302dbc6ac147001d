//! Experiment harnesses, TomoSAR elevation inversion, file formats and the
//! command-line front end built on [`gdls_core`].

pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod seeds;
pub mod tomosar;

pub use error::{Error, Result};
pub use gdls_core;
