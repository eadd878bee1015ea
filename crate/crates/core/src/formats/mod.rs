//! File formats shared by the CLI and the evaluation pipeline: trajectory
//! text files, scan/survey/observation CSVs, calibration JSON, run
//! configuration, and report JSON.
//!
//! Numeric fields serialize through Rust's shortest-round-trip float
//! formatting, so parse → serialize → parse is the identity.

mod calib;
mod config;
mod report;
mod tables;
mod trajectory;

pub use calib::{calibration_to_json, parse_calibration};
pub use config::{
    EvalConfig, FiducialConfig, RunConfig, ScannerConfig, SimConfig, TransformConfig,
};
pub use report::{DetectionJson, PlaneJson, ReportJson};
pub use tables::{
    gcps_to_csv, observations_to_csv, parse_gcps, parse_observations, parse_scan_csv,
    scans_to_csv,
};
pub use trajectory::{
    parse_trajectory, records_to_trajectory, serialize_trajectory, ParseIssue, PoseRecord,
    StampUnit,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
