//! Batch evaluation harness measuring security and reliability of
//! code-generating models: prompt sampling, generation through pluggable
//! backends with a safety gate, static vulnerability and hallucination
//! detection, constrained agent simulation with tamper-evident traces, and
//! statistically analyzed reports.

pub mod agentsim;
pub mod backend;
pub mod corpus;
pub mod error;
pub mod halluscan;
pub mod report;
pub mod rng;
pub mod stats;
pub mod syntax;
pub mod vulnscan;

pub use error::{Error, Result};

/// Tool version echoed into result bundles.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
