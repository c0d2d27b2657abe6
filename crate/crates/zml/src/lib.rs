//! Batch front end for `zml-core`: JSON configs in, CSV and JSON out.
//!
//! Every CSV has a header row and ends with a `# manifest {...}` comment
//! line; JSON verdicts embed the same manifest. Outputs carry no timestamps,
//! so identical manifests give byte-identical files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
