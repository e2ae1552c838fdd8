//! Run configuration, experiment drivers and CSV output for the command
//! line front end.

mod config;
mod experiments;
pub mod output;

pub use config::{load_config, parse_config, parse_with_profile, read_state_csv, InitialCondition, Outputs, Profile, RunConfig};
pub use experiments::{
    cmd_conserve, cmd_converge, cmd_run, cmd_truncate, convergence_row, default_rk4_dt, CommandError, ConserveReport,
    ConvergenceReport, ConvergenceRow, RowStatus, RunSummary, TruncationReport, TruncationRow, CONSERVATION_FILE,
    CONVERGENCE_FILE, TRUNCATION_FILE,
};
