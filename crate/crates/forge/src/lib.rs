//! File formats and the command-line front end for `density-forge-core`.

pub mod cli;
pub mod output;
pub mod spec_file;
