//! JSON output artifacts: detection results and evaluation reports, each
//! carrying the fully-resolved configuration that produced them.

use serde::{Deserialize, Serialize};

use crate::detector::DetectionResult;
use crate::eval::EvaluationReport;

use super::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneJson {
    pub normal: [f64; 3],
    pub offset: f64,
}

/// `detect` output artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionJson {
    pub center: [f64; 3],
    pub votes: f64,
    pub edge_count: usize,
    pub plane: PlaneJson,
    pub effective_config: RunConfig,
}

impl DetectionJson {
    pub fn from_result(result: &DetectionResult, config: RunConfig) -> Self {
        let n = result.plane.normal();
        Self {
            center: [result.center.x, result.center.y, result.center.z],
            votes: result.votes,
            edge_count: result.edge_count,
            plane: PlaneJson {
                normal: [n.x, n.y, n.z],
                offset: result.plane.offset(),
            },
            effective_config: config,
        }
    }
}

/// `evaluate` / `evaluate-multi` output artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    /// Site selector the run was scored under (site 3 doubles the
    /// multiplier).
    pub site: u8,
    #[serde(flatten)]
    pub report: EvaluationReport,
    pub effective_config: RunConfig,
}
