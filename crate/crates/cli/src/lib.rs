//! Experiment drivers and the acceptance suite behind the `stit` binary.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod oracle;
pub mod report;
