//! File formats, parallel sweeps, benchmarks and the command line for
//! [`ridge_sketch_core`].

pub mod bench;
pub mod cli;
pub mod grid;
pub mod io;
pub mod report;
pub mod runner;

pub use ridge_sketch_core as core;
