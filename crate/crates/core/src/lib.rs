//! Monte Carlo threshold estimation for a length-`n` dual-basis repetition
//! code concatenated with the 3D topological cluster-state code, under
//! dephasing-biased circuit noise.
//!
//! The pipeline per trial: noisy preparation of the concatenated cluster
//! state in a Pauli frame ([`lattice::run_preparation`]), majority-vote
//! readout with soft information ([`rep_code`]), cell-parity syndrome
//! extraction ([`lattice::extract_syndrome`]), weighted minimum-weight
//! perfect matching ([`decoder::decode`]) and a homology check
//! ([`lattice::logical_failure`]). [`experiments`] batches trials, sweeps
//! grids and fits thresholds.

pub mod decoder;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod rep_code;

pub use error::{Error, Result};

/// Version tag written into every CSV row and JSON file.
pub const SCHEMA_VERSION: u32 = 1;
