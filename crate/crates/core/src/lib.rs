//! Simulation and tomography of the exponential-SWAP gate between two
//! bosonic cavity modes.

pub mod error;
pub mod circuits;
pub mod dynamics;
pub mod encodings;
pub mod fockspace;
pub mod processtomo;
pub mod tomography;

pub use error::{Error, Result};
pub use fockspace::{DensityMatrix, ModeLabel, ModeSpace, Operator, StateVector};
