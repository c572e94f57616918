//! Erasmus-style fixture generation and the single-vs-bulk upload benchmark.

pub mod fixture;
pub mod report;
pub mod runner;

pub use fixture::{generate, Fixture};
pub use runner::{run_bench, BenchConfig, BenchError, BenchResult, Mode, Service};
