//! Pose-per-line trajectory text format.
//!
//! One pose per line: `timestamp tx ty tz qx qy qz qw`, whitespace
//! separated, `#` starts a comment. Parsing is lenient: malformed lines
//! become issues with their line numbers (the submission validator turns
//! them into findings) and quaternions are kept raw — norm checking is
//! the validator's job, not the parser's.

use nalgebra::{Quaternion, Translation3, UnitQuaternion};

use crate::geometry::{GeometryError, RigidTransform, TimedPose, Trajectory};

/// Timestamp unit of the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StampUnit {
    #[default]
    Seconds,
    Nanoseconds,
}

impl StampUnit {
    fn to_seconds(self, raw: f64) -> f64 {
        match self {
            StampUnit::Seconds => raw,
            StampUnit::Nanoseconds => raw * 1e-9,
        }
    }
}

/// One well-formed data line, quaternion unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub line_no: usize,
    pub timestamp: f64,
    pub translation: [f64; 3],
    /// Raw quaternion in file order (qx, qy, qz, qw).
    pub quat_xyzw: [f64; 4],
}

impl PoseRecord {
    pub fn quat_norm(&self) -> f64 {
        self.quat_xyzw.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A line-level parse problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseIssue {
    pub line_no: usize,
    pub code: &'static str,
    pub message: String,
}

/// Parses trajectory text leniently; malformed lines are reported, never
/// fatal.
pub fn parse_trajectory(text: &str, unit: StampUnit) -> (Vec<PoseRecord>, Vec<ParseIssue>) {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            issues.push(ParseIssue {
                line_no,
                code: "malformed_line",
                message: format!("expected 8 fields, found {}", fields.len()),
            });
            continue;
        }
        let mut values = [0.0f64; 8];
        let mut ok = true;
        for (slot, field) in values.iter_mut().zip(&fields) {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => *slot = v,
                _ => {
                    issues.push(ParseIssue {
                        line_no,
                        code: "malformed_line",
                        message: format!("field '{field}' is not a finite number"),
                    });
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        records.push(PoseRecord {
            line_no,
            timestamp: unit.to_seconds(values[0]),
            translation: [values[1], values[2], values[3]],
            quat_xyzw: [values[4], values[5], values[6], values[7]],
        });
    }
    if records.is_empty() {
        issues.push(ParseIssue {
            line_no: 0,
            code: "empty_trajectory",
            message: "no pose lines found".into(),
        });
    }
    (records, issues)
}

/// Builds a trajectory from parsed records, normalizing quaternions.
/// Fails if timestamps are not strictly increasing or a quaternion has
/// zero norm.
pub fn records_to_trajectory(
    records: &[PoseRecord],
    frame: &str,
) -> Result<Trajectory, GeometryError> {
    let mut poses = Vec::with_capacity(records.len());
    for r in records {
        let [qx, qy, qz, qw] = r.quat_xyzw;
        let q = Quaternion::new(qw, qx, qy, qz);
        if q.norm() < 1e-12 {
            return Err(GeometryError::InvalidTrajectory(format!(
                "line {}: zero-norm quaternion",
                r.line_no
            )));
        }
        poses.push(TimedPose {
            timestamp: r.timestamp,
            pose: RigidTransform::from_parts(
                Translation3::new(r.translation[0], r.translation[1], r.translation[2]),
                UnitQuaternion::from_quaternion(q),
            ),
        });
    }
    Trajectory::new(frame, poses)
}

/// Serializes a trajectory back to the pose-per-line format.
pub fn serialize_trajectory(traj: &Trajectory) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for p in traj.poses() {
        let t = p.pose.translation.vector;
        let q = p.pose.rotation.coords; // (x, y, z, w)
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            p.timestamp, t.x, t.y, t.z, q.x, q.y, q.z, q.w
        ));
    }
    out
}
