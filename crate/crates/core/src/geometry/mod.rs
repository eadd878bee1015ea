//! Core 3D primitives: rigid transforms, plane fitting, rigid point-set
//! alignment, and timestamped pose interpolation.
//!
//! Conventions: lengths in meters, time in seconds, angles in radians.
//! A `RigidTransform` named `a_from_b` maps points expressed in frame `b`
//! into frame `a`.

mod align;
mod plane;
mod trajectory;

pub use align::{alignment_residuals, kabsch_align};
pub use plane::{fit_plane, project_to_plane, Plane, PlanePoint, RansacParams};
pub use trajectory::{TimedPose, Trajectory, DEFAULT_MAX_GAP};

use thiserror::Error;

/// 3D point, meters.
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector, meters.
pub type Vector3 = nalgebra::Vector3<f64>;
/// Unit quaternion rotation; construction normalizes.
pub type UnitQuaternion = nalgebra::UnitQuaternion<f64>;
/// Rigid SE(3) transform (rotation + translation).
pub type RigidTransform = nalgebra::Isometry3<f64>;

/// Errors from geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Input does not constrain the requested fit (too few points,
    /// collinear/coincident points, mismatched lengths).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// RANSAC failed to find a majority consensus set.
    #[error("no consensus: best inlier set {inliers}/{total} is below 50%")]
    NoConsensus { inliers: usize, total: usize },
    /// Queried timestamp lies outside the trajectory span.
    #[error("timestamp {t} outside trajectory span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    /// The bracketing knot interval is wider than the allowed gap.
    #[error("gap of {gap}s at t={t} exceeds max gap {max_gap}s")]
    GapTooLarge { t: f64, gap: f64, max_gap: f64 },
    /// Timestamps are not strictly increasing or not finite.
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}
