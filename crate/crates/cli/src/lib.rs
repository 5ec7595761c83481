//! Experiment driver for the Ehrhart toolkit: dataset generation, the
//! machine-learning studies, the Markov-family verification, and one-off
//! polytope analysis.  The `ehrhart-lab` binary and the test suite both run
//! everything through this library, so results are reproducible either way.

pub mod analyze;
pub mod experiments;
pub mod pipeline;
pub mod report;

pub use pipeline::RunConfig;
pub use report::ExperimentReport;
