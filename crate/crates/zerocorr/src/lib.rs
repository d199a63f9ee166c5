//! File formats, parallel drivers and the `zerocorr` command line on top of
//! [`zerocorr_core`].
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;
pub mod zeros;

pub use error::{CliError, CliResult};
pub use zeros::load_zeros;
