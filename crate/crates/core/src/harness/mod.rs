//! Scenario configuration, the multi-stage runner, metrics, ablations and reports.

mod ablation;
mod config;
mod metrics;
mod report;
mod runner;

pub use ablation::{load_matrix, preset, run_ablation, AblationResult, Variant};
pub use config::{CcsSection, CsvSection, DataSource, ModelSection, ScenarioConfig, SyntheticSection};
pub use metrics::{accn, evaluate, Evaluation};
pub use report::{
    comparison_table, summary_csv, timings_csv, write_summary_csv, ComparisonRow, RunReport,
    StageReport, SummaryRow, TOOL_NAME, TOOL_VERSION,
};
pub use runner::{prepare_data, run_prepared, run_scenario, run_scenario_with_model, PreparedData, TrainedRun};
