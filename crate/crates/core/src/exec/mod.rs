//! Plan execution on the simulated plant, fault injection and metrics.

mod faults;
mod report;
mod runner;

pub use faults::{load_faults, parse_faults, FaultFileError, FaultKind, FaultSpec};
pub use report::{
    read_results, run_experiment, ticks_csv, trace_jsonl, write_experiment, write_report,
    Experiment, FailureRecord, MetricsReport, RepResult, REPORT_JSON, REPORT_TABLE,
};
pub use runner::{execute_once, ExecConfig, RunOutcome, LOCALIZATION_ERROR, RETENTION_FORCE};
