//! Pseudospectral engine for one convex-integration step of the 2D Boussinesq
//! system with fractional dissipation, plus the diagnostics that certify it.

pub mod amplitudes;
pub mod config;
pub mod cutoffs;
pub mod dirichlet;
pub mod energy;
pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod iterate;
pub mod labs;
pub mod norms;
pub mod oscillation;
pub mod perturbation;
pub mod pressure;
pub mod report;
pub mod snapshot;
pub mod spectral;
pub mod sweep;
pub mod state;
pub mod stress;
pub mod temperature;
#[cfg(test)]
pub(crate) mod testsupport;
pub mod timegrid;
pub mod waves;

pub use error::{Error, Result};
