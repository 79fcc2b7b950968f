//! Command-line front end for the `lossy-walk` library: single runs,
//! parameter sweeps and figure-data presets, written as CSV or JSON.

// Validation uses `!(x > 0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{Command, RunConfig, Settings, VGrid};
pub use error::CliError;
pub use run::{execute, run, Artifact, Outcome, PointError, SweepRow};
pub use table::{format_g12, Cell, Format, Table};
