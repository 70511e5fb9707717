//! Scenario files, CSV tables and the simulation-versus-limit report.

pub mod compare;
pub mod scenario;
pub mod table;

pub use compare::{compare, CompareReport, CrossingEstimate};
pub use scenario::{parse_scenario, Scenario};
pub use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("cannot compare: {0}")]
    Compare(String),
}
