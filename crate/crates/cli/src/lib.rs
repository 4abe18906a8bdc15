//! Batch front-end for `pend3d`: scenario files in, CSV tables and SVG plots
//! out.

pub mod config;
pub mod svg;
pub mod table;
pub mod tasks;

pub use config::{parse_config, render, ConfigError, Scenario, Task};
pub use tasks::{run, RunError};
