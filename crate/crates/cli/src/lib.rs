//! Scenario runner behind the `resoshift` binary: JSON config in, CSV out.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod table;

pub use config::{ConfigError, ScenarioConfig, Task};
pub use run::{run, RunError, RunOptions};
pub use table::{Cell, ResultTable};
