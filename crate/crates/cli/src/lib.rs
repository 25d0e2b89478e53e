//! Command-line front-end for the `noisemix` library.
//!
//! Output is deterministic: the same inputs give byte-identical files no
//! matter how many worker threads are used.

// `!(x > 0)` is used on purpose: unlike `x <= 0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
