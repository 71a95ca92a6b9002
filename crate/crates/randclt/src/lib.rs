//! Experiment harness for `randclt-core`: a rayon executor, JSON system
//! descriptors and experiment configurations, CSV/JSON reports, table
//! presets and the `randclt` command line.

pub mod cli;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod report;

pub use error::{HarnessError, Result};
