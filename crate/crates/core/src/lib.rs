//! Incentive-aligned statistical contracts built from e-values.
//!
//! A principal (a regulator) offers a menu of license functions; an agent
//! who knows the quality `theta` of its product pays `C` to run a trial and
//! keeps a license to at most `f(Z)` in profit. Menus made of rescaled
//! e-values make trials unprofitable for null products. This crate holds the
//! numerics: Gaussian tails, e-value checks, agent best responses, principal
//! welfare, the drug-approval audit, and the multi-round profit license with
//! its dynamic program. It is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod evalue;
pub mod fda;
pub mod multi_round;
pub mod single_round;
pub mod stats;
pub mod welfare;

pub use error::{Error, Result};
