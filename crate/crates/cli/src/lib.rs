//! Experiment runner and serialization layer: configuration files, the
//! pair-dynamics/observable/weights/snapshot containers, CSV result tables,
//! and the experiment suite.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod table;

pub use error::{Error, Result};
