//! Config-driven orchestration: ingest, backcast, transform, select, train, evaluate, report.

mod config;
mod render;
mod report;
mod run;

use thiserror::Error;

pub use config::{BackcastConfig, DataConfig, FeatureConfig, ModelsConfig, PipelineConfig, SelectionConfig, SplitConfig};
pub use render::{correlation_svg, importance_svg, markdown, performance_table};
pub use report::{
    BackcastRecord, Coefficient, DownstreamReport, ModelReport, ModelSummary, RunReport, SelectionReport, SplitSummary, StageRecord, SummaryRow, UpstreamReport,
    REPORT_SCHEMA_VERSION,
};
pub use run::{prepare, run, run_downstream, write_artifacts, Prepared};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage} stage failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

impl PipelineError {
    pub(crate) fn stage(stage: &'static str) -> impl Fn(String) -> PipelineError {
        move |message| PipelineError::Stage { stage, message }
    }

    pub(crate) fn io(path: &std::path::Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
        move |e| PipelineError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
