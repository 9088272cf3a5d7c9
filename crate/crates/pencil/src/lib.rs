//! Matrix Market IO, experiment harness and output formats for `pencil-core`.

pub mod harness;
pub mod mtx;
pub mod output;
pub mod report;

pub use pencil_core as core;
