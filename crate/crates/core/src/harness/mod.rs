//! Experiment orchestration: configuration, seeded replications and output.

pub mod config;
mod output;
mod run;

pub use config::{RunConfig, Scale, TieMode};
pub use output::{
    fit_loglog_slope, fmt_sig, regret_envelope, write_csv, write_svg, OutputError, CSV_HEADER,
};
pub use run::{replication_rng, run_experiment, run_replication, RegretRow, RegretTrace, RunError};
