//! Scenario loading, experiment execution, metrics and report files.

pub mod experiment;
pub mod metrics;
pub mod report;
pub mod scenario;

pub use experiment::{run_experiment, run_once, ExperimentResult, ExperimentSpec, RunOptions, Sweep, SweepParam};
pub use metrics::{
    compute_restoration_stats, compute_strong_success_rate, compute_success_rate, compute_throughput, MetricsReport,
    RestorationStats, RunMetrics, SuccessUnit,
};
pub use report::{emit_reports, ReportError};
pub use scenario::{load_scenario, Scenario, ScenarioError};
