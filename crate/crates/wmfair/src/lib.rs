//! Command-line front end for `wmfair-core`: litmus runs, fair model
//! checking against Muller specifications, probability brackets and
//! random sampling, with JSON reports and Graphviz export.

pub mod cli;
pub mod commands;
pub mod dot;
pub mod pool;
pub mod render;
pub mod report;
pub mod spec_file;

pub use commands::{run, Failure, Output};
