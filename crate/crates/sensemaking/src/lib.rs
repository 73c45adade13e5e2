//! Scenario files, reports and the command-line front end for
//! [`sensemaking_core`].

pub mod cli;
pub mod report;
pub mod scenario;

pub use scenario::{Diagnostic, DiagnosticKind, Scenario, ScenarioFile, FIXTURES};
