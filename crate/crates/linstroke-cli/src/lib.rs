//! Command-line front end: flat key=value configs, CSV artifacts, SVG plots
//! and the four subcommands wired to the `linstroke` library.

pub mod commands;
pub mod config;
pub mod csv;
pub mod plot;

pub use config::{ConfigError, RunConfig};
