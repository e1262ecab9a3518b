//! Drivers behind the `frustration` command: the slope/plateau table,
//! energy sweeps, the conjectured slope relations and the invariant suite,
//! with CSV and JSON persistence.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod invariants;
pub mod output;
pub mod record;

pub use commands::{conjecture, sweep, table1, Report};
pub use config::Settings;
pub use error::{exit_code, ExitKind, Failure};
pub use record::{RecordKind, ResultRecord};
