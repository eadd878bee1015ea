//! Submission integrity: format diagnostics, trajectory-discontinuity
//! screening near GCP timestamps, and progressive-submission diffing.
//!
//! All numeric gates here are declared heuristics with documented
//! defaults; the checks themselves never fail — problems become findings,
//! and a submission is accepted iff no error-severity finding exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formats::{parse_trajectory, PoseRecord, StampUnit};
use crate::geometry::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("submissions do not overlap in time")]
    NoOverlap,
}

/// Thresholds for the integrity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    /// Accepted deviation of quaternion norms from 1.
    pub quat_norm_tol: f64,
    /// Minimum fraction of the expected time span the submission must
    /// cover before an `incomplete_trajectory` warning fires.
    pub min_span_coverage: f64,
    /// Minimum mean pose rate; below it the submission is rejected as a
    /// sparse trajectory.
    pub min_pose_rate_hz: f64,
    /// Speed above which a pose-to-pose jump counts as a discontinuity.
    pub vel_threshold_mps: f64,
    /// Half-width of the window around a GCP timestamp within which a
    /// discontinuity or localized change is attributed to that GCP.
    pub gcp_window_s: f64,
    /// MAD multiplier for the localized-change threshold in submission
    /// diffs.
    pub diff_mad_k: f64,
    /// Floor on the required excess over the median displacement, meters;
    /// keeps numerical noise on top of a uniform offset from opening
    /// windows.
    pub min_displacement_m: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            quat_norm_tol: 1e-3,
            min_span_coverage: 0.9,
            min_pose_rate_hz: 10.0,
            vel_threshold_mps: 5.0,
            gcp_window_s: 1.0,
            diff_mad_k: 5.0,
            min_displacement_m: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One diagnostic finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub timestamp: Option<f64>,
    pub line: Option<usize>,
}

/// The submission verdict: accepted iff no error finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub accepted: bool,
}

/// Runs the format and plausibility checks over raw submission text.
///
/// Checks: parseable lines, strictly increasing timestamps, quaternion
/// norms within tolerance, coverage of the expected span (warning), and
/// mean pose rate (sparse submissions are rejected).
pub fn validate_submission(
    raw_text: &str,
    expected_span: Option<(f64, f64)>,
    cfg: &ValidationConfig,
) -> ValidationReport {
    let (records, issues) = parse_trajectory(raw_text, StampUnit::Seconds);
    let mut findings: Vec<Finding> = issues
        .into_iter()
        .map(|issue| Finding {
            severity: Severity::Error,
            code: issue.code.to_string(),
            message: issue.message,
            timestamp: None,
            line: (issue.line_no > 0).then_some(issue.line_no),
        })
        .collect();

    for pair in records.windows(2) {
        if !(pair[1].timestamp > pair[0].timestamp) {
            findings.push(Finding {
                severity: Severity::Error,
                code: "nonmonotonic_timestamp".into(),
                message: format!(
                    "timestamp {} does not increase past {}",
                    pair[1].timestamp, pair[0].timestamp
                ),
                timestamp: Some(pair[1].timestamp),
                line: Some(pair[1].line_no),
            });
        }
    }

    for r in &records {
        let norm = r.quat_norm();
        if (norm - 1.0).abs() > cfg.quat_norm_tol {
            findings.push(Finding {
                severity: Severity::Error,
                code: "invalid_quaternion".into(),
                message: format!("quaternion norm {norm:.6} outside 1 ± {}", cfg.quat_norm_tol),
                timestamp: Some(r.timestamp),
                line: Some(r.line_no),
            });
        }
    }

    if let (Some((t0, t1)), false) = (expected_span, records.is_empty()) {
        let span = (t1 - t0).max(f64::MIN_POSITIVE);
        let (lo, hi) = record_span(&records);
        let overlap = (hi.min(t1) - lo.max(t0)).max(0.0);
        let coverage = overlap / span;
        if coverage < cfg.min_span_coverage {
            findings.push(Finding {
                severity: Severity::Warning,
                code: "incomplete_trajectory".into(),
                message: format!(
                    "covers {:.1}% of the expected span, below {:.1}%",
                    coverage * 100.0,
                    cfg.min_span_coverage * 100.0
                ),
                timestamp: Some(lo),
                line: None,
            });
        }
    }

    if !records.is_empty() {
        let (lo, hi) = record_span(&records);
        let rate = if records.len() < 2 || hi <= lo {
            0.0
        } else {
            (records.len() - 1) as f64 / (hi - lo)
        };
        if rate < cfg.min_pose_rate_hz {
            findings.push(Finding {
                severity: Severity::Error,
                code: "sparse_trajectory".into(),
                message: format!(
                    "mean pose rate {rate:.3} Hz below {} Hz",
                    cfg.min_pose_rate_hz
                ),
                timestamp: None,
                line: None,
            });
        }
    }

    findings.sort_by(|a, b| {
        match (a.timestamp, b.timestamp) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.total_cmp(&y),
        }
        .then_with(|| a.code.cmp(&b.code))
    });
    let accepted = findings.iter().all(|f| f.severity != Severity::Error);
    ValidationReport { findings, accepted }
}

fn record_span(records: &[PoseRecord]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records {
        lo = lo.min(r.timestamp);
        hi = hi.max(r.timestamp);
    }
    (lo, hi)
}

/// A pose-to-pose speed exceedance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityFlag {
    pub t_start: f64,
    pub t_end: f64,
    pub speed_mps: f64,
    /// The GCP timestamp this jump is attributed to, when within the
    /// window; exceedances away from every GCP are warnings.
    pub gcp_time: Option<f64>,
    pub severity: Severity,
}

/// Scans for finite-difference speed exceedances and attributes those
/// near a GCP timestamp to it. Speeds are frame-invariant, so the flags
/// are unchanged under a rigid transform of the whole trajectory.
pub fn detect_discontinuities(
    traj: &Trajectory,
    gcp_times: &[f64],
    cfg: &ValidationConfig,
) -> Vec<DiscontinuityFlag> {
    let mut flags = Vec::new();
    for pair in traj.poses().windows(2) {
        let dt = pair[1].timestamp - pair[0].timestamp;
        if dt <= 0.0 {
            continue;
        }
        let dist = (pair[1].pose.translation.vector - pair[0].pose.translation.vector).norm();
        let speed = dist / dt;
        if speed > cfg.vel_threshold_mps {
            let gcp_time = gcp_times
                .iter()
                .copied()
                .find(|g| {
                    pair[0].timestamp <= g + cfg.gcp_window_s
                        && pair[1].timestamp >= g - cfg.gcp_window_s
                });
            flags.push(DiscontinuityFlag {
                t_start: pair[0].timestamp,
                t_end: pair[1].timestamp,
                speed_mps: speed,
                severity: if gcp_time.is_some() {
                    Severity::Error
                } else {
                    Severity::Warning
                },
                gcp_time,
            });
        }
    }
    flags
}

/// A maximal interval of above-threshold displacement between two
/// progressive submissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub peak_displacement_m: f64,
}

/// Result of diffing two progressive submissions of one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    /// (timestamp, displacement) at every matched timestamp.
    pub samples: Vec<(f64, f64)>,
    pub windows: Vec<ChangeWindow>,
    /// GCPs whose window around the timestamp overlaps a change window.
    pub flagged_gcps: Vec<String>,
    /// The localized-change threshold that was applied.
    pub threshold_m: f64,
}

/// Compares two submissions pose-wise and reports localized changes.
///
/// Displacements are measured at each of `curr`'s timestamps inside
/// `prev`'s span. The window threshold is median + max(k·MAD, floor), so
/// a global re-registration of the whole trajectory (a uniform
/// displacement) yields no localized windows, while point-wise edits
/// around a GCP timestamp do.
pub fn diff_submissions(
    prev: &Trajectory,
    curr: &Trajectory,
    gcp_times: &[(String, f64)],
    cfg: &ValidationConfig,
) -> Result<DiffReport, ValidationError> {
    let (Some(start), Some(end)) = (prev.start_time(), prev.end_time()) else {
        return Err(ValidationError::NoOverlap);
    };
    let mut samples = Vec::new();
    for p in curr.poses() {
        if p.timestamp < start || p.timestamp > end {
            continue;
        }
        // Gap checking is irrelevant when diffing: interpolate across
        // anything inside the span.
        let reference = prev
            .interpolate(p.timestamp, f64::INFINITY)
            .expect("timestamp inside span");
        let displacement =
            (p.pose.translation.vector - reference.translation.vector).norm();
        samples.push((p.timestamp, displacement));
    }
    if samples.is_empty() {
        return Err(ValidationError::NoOverlap);
    }

    let displacements: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let med = median(&displacements);
    let deviations: Vec<f64> = displacements.iter().map(|d| (d - med).abs()).collect();
    let mad = median(&deviations);
    let threshold = med + (cfg.diff_mad_k * mad).max(cfg.min_displacement_m);

    let mut windows: Vec<ChangeWindow> = Vec::new();
    let mut open: Option<ChangeWindow> = None;
    for &(t, d) in &samples {
        if d > threshold {
            match &mut open {
                Some(w) => {
                    w.t_end = t;
                    w.peak_displacement_m = w.peak_displacement_m.max(d);
                }
                None => {
                    open = Some(ChangeWindow {
                        t_start: t,
                        t_end: t,
                        peak_displacement_m: d,
                    });
                }
            }
        } else if let Some(w) = open.take() {
            windows.push(w);
        }
    }
    if let Some(w) = open.take() {
        windows.push(w);
    }

    let mut flagged_gcps = Vec::new();
    for (name, g) in gcp_times {
        let hit = windows.iter().any(|w| {
            w.t_start <= g + cfg.gcp_window_s && w.t_end >= g - cfg.gcp_window_s
        });
        if hit && !flagged_gcps.contains(name) {
            flagged_gcps.push(name.clone());
        }
    }
    Ok(DiffReport {
        samples,
        windows,
        flagged_gcps,
        threshold_m: threshold,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
