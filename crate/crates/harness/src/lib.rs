//! Dataset builds, solver benchmarks, accuracy tables and the quiz API.

pub mod bench;
pub mod dataset;
pub mod server;
pub mod stats;
