//! Simulation harness and config handling behind the `multiperm` binary.

pub mod config;
pub mod sim;

pub use config::{parse_config, parse_config_str, ConfigError, DecoderKind, SimConfig};
pub use sim::{simulate, wilson_interval, write_csv, Roster, SimRow, CSV_HEADER};
