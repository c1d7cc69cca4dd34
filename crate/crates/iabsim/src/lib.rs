//! Std companion to `iabsim-core`: TOML configs, CSV tables, the
//! experiment runner behind the `iabsim` binary, and plot-script output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config_file;
pub mod error;
pub mod experiment;
pub mod output;
pub mod plot;

pub use config_file::{config_to_toml, load_config, parse_config, ConfigFile, LoadedConfig};
pub use error::HarnessError;
pub use experiment::{run, Engine, ExperimentKind, ExperimentSpec, RunReport};
pub use plot::emit_plot_script;
