//! Command-line front end for the star-diffusion toolkit: experiment
//! registry, JSON configuration with defaults and overrides, deterministic
//! result rows with versioned CSV/JSON emission, and the gated acceptance
//! suite.
//!
//! Exit-code contract of the `walsh` binary: `0` all gates pass, `1` a gate
//! failed, `2` configuration error, `3` internal error.

// validation guards are written `!(x > 0.0)` so that NaN fails them;
// the suggested `x <= 0.0` would let NaN through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod registry;
pub mod rows;

pub use config::{parse_config, CliError, ExperimentConfig};
