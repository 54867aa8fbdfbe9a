//! Fair verification over the connectivity graph of plain configurations.

pub mod analysis;
pub mod graph;
pub mod reach;
pub mod sample;
pub mod saturate;

pub use analysis::{qualitative, quantitative, unfair, Bracket, Components, ConnectivityGraph, Lasso, Verdict};
pub use graph::{Expander, Label, ProductGraph, Sequential, StateLimit};
pub use reach::{outcomes, Outcomes};
pub use sample::{fair_sample, RunAudit};
pub use saturate::{saturate, BoundStat, Saturated, SaturationError};
