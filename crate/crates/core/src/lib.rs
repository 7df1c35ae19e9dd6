//! Converts conventional unit tests of a Rust project into parameterized
//! unit tests whose argument providers are filled with arguments captured
//! at runtime, then classifies each generated test by how tightly its
//! oracle is coupled to the original input.

pub mod analysis;
pub mod capture;
pub mod cargo;
pub mod config;
pub mod fsutil;
pub mod generate;
pub mod instrument;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod pipeline;
pub mod runner;
pub mod scalar;

pub use error::{Error, Result};
