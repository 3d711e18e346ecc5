//! Experiment orchestration: the training loop, multi-seed runs, episode
//! CSVs and the statistical comparison of two agents.

mod config;
mod records;
mod stats;
mod train;

pub use config::{AgentKind, ExperimentConfig, RankBy};
pub use records::{
    parse_records, read_records, records_to_csv, write_records, EpisodeEnd, EpisodeRecord, CSV_HEADER,
};
pub use stats::{
    compare, moving_average, student_t_test, welch_t_test, AgentSummary, ComparisonReport, RunCurves,
    TTest, FINAL_WINDOW,
};
pub use train::{
    run_experiment, run_experiment_with_progress, run_single, ExperimentOutput, RunContext, RunResult,
    ScheduleCounters,
};
