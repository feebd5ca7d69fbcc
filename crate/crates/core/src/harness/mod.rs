//! Reproducible experiments: configuration, paired trials of the three
//! placement schemes, parameter sweeps and CSV output.

mod config;
mod experiment;

pub use config::{load_config, parse_config, ExperimentConfig, ModeKind, Sweeps};
pub use experiment::{
    run_experiment, run_trial, run_trial_on, summarize, ExperimentOutput, ReportRow, Scheme,
    SchemeReport, SummaryRow, SweepPoint, TrialOutcome, TrialRow,
};
