//! Library half of the `mot` command: configuration, reports, the named
//! experiments and the command implementations.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod parallel;
pub mod report;
