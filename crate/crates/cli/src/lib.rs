//! Library side of the command-line tool: the command implementations,
//! on-disk record schemas, and run manifests. The `exposure-games` binary
//! is a thin clap dispatcher over these.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod records;
pub mod workers;
