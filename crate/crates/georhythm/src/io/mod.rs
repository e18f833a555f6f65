//! File formats, run configuration, and the command implementations
//! behind the `georhythm` binary.

pub mod commands;
pub mod config;
pub mod formats;
