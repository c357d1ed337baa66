//! Simulation, file formats and command line on top of `mcpdist-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compute;
pub mod config;
mod error;
pub mod simulate;
pub mod table;
pub mod validate;

pub use error::{AppError, AppResult};
pub use mcpdist_core as core;
