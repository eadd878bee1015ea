//! Challenge scoring engine: trajectory-to-GCP evaluation, bracket
//! scores, sequence normalization, multi-session evaluation, sparse RMSE
//! ATE, coverage, and Rayleigh error statistics.
//!
//! Submitted trajectories are world ← IMU pose sequences. A GCP
//! observation carries the measured point in some sensor frame; the
//! calibration set holds the IMU ← sensor extrinsics (participants may
//! supply their own). Evaluation interpolates the pose at the observation
//! timestamp, maps the point to world, rigidly aligns the estimates to the
//! surveyed positions, and scores the per-point errors.

mod rayleigh;
mod score;

pub use rayleigh::{rayleigh_fit, RayleighFit};
pub use score::{score_error, sequence_score, ScoreBracket, ScoreBrackets};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{kabsch_align, GeometryError, Point3, RigidTransform, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("calibration set has no entry for sensor frame '{0}'")]
    MissingFrame(String),
    #[error("sequence has no GCP observations")]
    EmptySequence,
    #[error("insufficient coverage: {covered} covered GCPs, need at least {required}")]
    InsufficientCoverage { covered: usize, required: usize },
    #[error("observation references unknown GCP '{0}'")]
    UnknownGcp(String),
    #[error("invalid score brackets: {0}")]
    InvalidBrackets(String),
    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A pre-surveyed ground control point in the world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundControlPoint {
    pub name: String,
    pub position: Point3,
}

/// One measurement of a GCP in a sensor frame at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct GcpObservation {
    pub timestamp: f64,
    pub gcp: String,
    pub sensor_frame: String,
    pub point_in_sensor: Point3,
}

/// Named sensor extrinsics, IMU ← sensor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationSet {
    frames: BTreeMap<String, RigidTransform>,
}

impl CalibrationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identity extrinsics for the two standard frames.
    pub fn identity_defaults() -> Self {
        let mut set = Self::new();
        set.insert("lidar", RigidTransform::identity());
        set.insert("tip", RigidTransform::identity());
        set
    }

    pub fn insert(&mut self, frame: impl Into<String>, imu_from_sensor: RigidTransform) {
        self.frames.insert(frame.into(), imu_from_sensor);
    }

    pub fn get(&self, frame: &str) -> Option<&RigidTransform> {
        self.frames.get(frame)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &RigidTransform)> {
        self.frames.iter()
    }

    /// Overlays participant-supplied entries on top of `self`.
    pub fn merged_with(&self, overrides: &CalibrationSet) -> CalibrationSet {
        let mut frames = self.frames.clone();
        for (k, v) in &overrides.frames {
            frames.insert(k.clone(), *v);
        }
        CalibrationSet { frames }
    }
}

/// A GCP observation mapped into the world frame via the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedGcp {
    pub obs_index: usize,
    pub gcp: String,
    pub timestamp: f64,
    pub position: Point3,
}

/// An observation the trajectory could not cover, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct UncoveredGcp {
    pub obs_index: usize,
    pub gcp: String,
    pub timestamp: f64,
    pub reason: String,
}

/// Maps each observation to `pose(t) · calib[frame] · point`. Observations
/// whose timestamp cannot be interpolated (outside the span, or across a
/// gap wider than `max_gap`) land in the uncovered list instead.
pub fn estimated_gcp_positions(
    traj: &Trajectory,
    observations: &[GcpObservation],
    calib: &CalibrationSet,
    max_gap: f64,
) -> Result<(Vec<EstimatedGcp>, Vec<UncoveredGcp>), EvalError> {
    let mut covered = Vec::new();
    let mut uncovered = Vec::new();
    for (obs_index, obs) in observations.iter().enumerate() {
        let imu_from_sensor = calib
            .get(&obs.sensor_frame)
            .ok_or_else(|| EvalError::MissingFrame(obs.sensor_frame.clone()))?;
        match traj.interpolate(obs.timestamp, max_gap) {
            Ok(world_from_imu) => covered.push(EstimatedGcp {
                obs_index,
                gcp: obs.gcp.clone(),
                timestamp: obs.timestamp,
                position: world_from_imu * imu_from_sensor * obs.point_in_sensor,
            }),
            Err(e @ (GeometryError::OutOfRange { .. } | GeometryError::GapTooLarge { .. })) => {
                uncovered.push(UncoveredGcp {
                    obs_index,
                    gcp: obs.gcp.clone(),
                    timestamp: obs.timestamp,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((covered, uncovered))
}

/// One scored observation in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcpRow {
    /// Sequence label (multi-session reports only).
    pub sequence: Option<String>,
    pub gcp: String,
    pub timestamp: f64,
    /// Post-alignment error; absent for uncovered observations.
    pub error_m: Option<f64>,
    pub score: u32,
    pub covered: bool,
}

/// Evaluation result for one sequence (or one site in multi-session mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<GcpRow>,
    /// Normalized score in [0, multiplier].
    pub sequence_score: f64,
    /// RMSE over covered observations only.
    pub rmse_ate_m: Option<f64>,
    /// Covered fraction of the listed observations.
    pub gcp_coverage: f64,
    pub multiplier: u32,
}

/// Evaluates one sequence. Uncovered observations score 0 and are
/// excluded from the alignment and the RMSE; the normalization counts all
/// listed observations.
pub fn evaluate_sequence(
    traj: &Trajectory,
    observations: &[GcpObservation],
    calib: &CalibrationSet,
    gcps: &[GroundControlPoint],
    brackets: &ScoreBrackets,
    multiplier: u32,
    max_gap: f64,
) -> Result<EvaluationReport, EvalError> {
    let (covered, uncovered) = estimated_gcp_positions(traj, observations, calib, max_gap)?;
    assemble_report(
        vec![(None, covered, uncovered)],
        gcps,
        brackets,
        multiplier,
    )
}

/// A named session for multi-session evaluation.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    pub name: String,
    pub trajectory: &'a Trajectory,
    pub observations: &'a [GcpObservation],
}

/// Evaluates several sequences submitted in one common world frame as a
/// single concatenated trajectory: all covered estimates enter one rigid
/// alignment and one normalization.
pub fn evaluate_multi_session(
    sessions: &[Session<'_>],
    calib: &CalibrationSet,
    gcps: &[GroundControlPoint],
    brackets: &ScoreBrackets,
    multiplier: u32,
    max_gap: f64,
) -> Result<EvaluationReport, EvalError> {
    let mut parts = Vec::with_capacity(sessions.len());
    for s in sessions {
        let (covered, uncovered) =
            estimated_gcp_positions(s.trajectory, s.observations, calib, max_gap)?;
        parts.push((Some(s.name.clone()), covered, uncovered));
    }
    assemble_report(parts, gcps, brackets, multiplier)
}

/// The final challenge score: sum of the per-sequence scores.
pub fn total_score(reports: &[EvaluationReport]) -> f64 {
    reports.iter().map(|r| r.sequence_score).sum()
}

fn assemble_report(
    parts: Vec<(Option<String>, Vec<EstimatedGcp>, Vec<UncoveredGcp>)>,
    gcps: &[GroundControlPoint],
    brackets: &ScoreBrackets,
    multiplier: u32,
) -> Result<EvaluationReport, EvalError> {
    brackets.validate()?;
    let surveyed: BTreeMap<&str, Point3> = gcps
        .iter()
        .map(|g| (g.name.as_str(), g.position))
        .collect();

    let mut surveyed_pts = Vec::new();
    let mut estimated_pts = Vec::new();
    // (sequence, obs_index within sequence, gcp, timestamp, covered-slot)
    let mut covered_meta = Vec::new();
    let mut uncovered_rows = Vec::new();
    for (label, covered, uncovered) in &parts {
        for est in covered {
            let pos = surveyed
                .get(est.gcp.as_str())
                .ok_or_else(|| EvalError::UnknownGcp(est.gcp.clone()))?;
            surveyed_pts.push(*pos);
            estimated_pts.push(est.position);
            covered_meta.push((label.clone(), est.obs_index, est.gcp.clone(), est.timestamp));
        }
        for unc in uncovered {
            if !surveyed.contains_key(unc.gcp.as_str()) {
                return Err(EvalError::UnknownGcp(unc.gcp.clone()));
            }
            uncovered_rows.push((label.clone(), unc.obs_index, unc.gcp.clone(), unc.timestamp));
        }
    }
    let total_obs = covered_meta.len() + uncovered_rows.len();
    if total_obs == 0 {
        return Err(EvalError::EmptySequence);
    }
    if covered_meta.len() < 3 {
        return Err(EvalError::InsufficientCoverage {
            covered: covered_meta.len(),
            required: 3,
        });
    }

    let transform = kabsch_align(&estimated_pts, &surveyed_pts)?;
    let mut rows: Vec<(Option<String>, usize, GcpRow)> = covered_meta
        .into_iter()
        .zip(surveyed_pts.iter().zip(&estimated_pts))
        .map(|((label, obs_index, gcp, timestamp), (s, e))| {
            let error = (s - transform * e).norm();
            let row = GcpRow {
                sequence: label.clone(),
                gcp,
                timestamp,
                error_m: Some(error),
                score: score_error(error, brackets),
                covered: true,
            };
            (label, obs_index, row)
        })
        .collect();
    for (label, obs_index, gcp, timestamp) in uncovered_rows {
        rows.push((
            label.clone(),
            obs_index,
            GcpRow {
                sequence: label,
                gcp,
                timestamp,
                error_m: None,
                score: 0,
                covered: false,
            },
        ));
    }
    // Deterministic order: by sequence label, then original observation index.
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let rows: Vec<GcpRow> = rows.into_iter().map(|(_, _, r)| r).collect();

    let scores: Vec<u32> = rows.iter().map(|r| r.score).collect();
    let seq_score = sequence_score(&scores, brackets.max_points_per_gcp, multiplier)?;
    let covered_errors: Vec<f64> = rows.iter().filter_map(|r| r.error_m).collect();
    let rmse = if covered_errors.is_empty() {
        None
    } else {
        Some(
            (covered_errors.iter().map(|e| e * e).sum::<f64>() / covered_errors.len() as f64)
                .sqrt(),
        )
    };
    Ok(EvaluationReport {
        gcp_coverage: covered_errors.len() as f64 / total_obs as f64,
        rows,
        sequence_score: seq_score,
        rmse_ate_m: rmse,
        multiplier,
    })
}
