//! Command-line front end for the LMG Otto engine library: configuration,
//! CSV/JSON/SVG emitters and figure presets.

pub mod config;
pub mod emit;
pub mod presets;
pub mod run;
pub mod svg;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{execute, CliError};
