//! Simulation and estimation toolkit for quantum reservoir parameter
//! estimation: exact pair-wise reservoir dynamics, readout training,
//! product-POVM snapshot sampling, unbiased estimators for linear and
//! quadratic state functions, and rigorous variance bounds with sample
//! planning.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod qla;
pub mod reservoir;
pub mod sampling;
pub mod shadows;
pub mod statelib;
pub mod training;

pub use error::{Error, Result};
