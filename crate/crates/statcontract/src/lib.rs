//! File formats, configuration, plots and experiment runners for
//! incentive-aligned statistical contracts.
//!
//! The numerics live in [`statcontract_core`]; this crate adds everything
//! that touches the file system, plus replicate-parallel Monte Carlo.

pub mod config;
pub mod experiments;
pub mod format;
pub mod parallel;
pub mod svg;

pub use statcontract_core as core;
