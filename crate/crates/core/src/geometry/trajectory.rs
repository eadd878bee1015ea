//! Timestamped pose sequences and pose interpolation.

use nalgebra::UnitQuaternion;

use super::{GeometryError, RigidTransform};

/// Default maximum knot gap accepted when interpolating, seconds.
pub const DEFAULT_MAX_GAP: f64 = 0.5;

/// Timestamps closer than this to a knot resolve to the stored pose.
const KNOT_EPS: f64 = 1e-9;

/// A pose (world ← body) at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub timestamp: f64,
    pub pose: RigidTransform,
}

/// An ordered pose sequence in a named body frame.
///
/// Timestamps are strictly increasing; construction enforces it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    frame: String,
    poses: Vec<TimedPose>,
}

impl Trajectory {
    pub fn new(frame: impl Into<String>, poses: Vec<TimedPose>) -> Result<Self, GeometryError> {
        for pair in poses.windows(2) {
            if !(pair[1].timestamp > pair[0].timestamp) {
                return Err(GeometryError::InvalidTrajectory(format!(
                    "timestamps not strictly increasing at t={}",
                    pair[1].timestamp
                )));
            }
        }
        if poses.iter().any(|p| !p.timestamp.is_finite()) {
            return Err(GeometryError::InvalidTrajectory(
                "non-finite timestamp".into(),
            ));
        }
        Ok(Self {
            frame: frame.into(),
            poses,
        })
    }

    pub fn frame(&self) -> &str {
        &self.frame
    }

    pub fn poses(&self) -> &[TimedPose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn start_time(&self) -> Option<f64> {
        self.poses.first().map(|p| p.timestamp)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.poses.last().map(|p| p.timestamp)
    }

    /// Pose at time `t`: exact knot poses within 1 ns, otherwise linear
    /// translation interpolation and shortest-arc slerp between the
    /// bracketing knots. Fails if `t` is outside the span or the bracket
    /// is wider than `max_gap`.
    pub fn interpolate(&self, t: f64, max_gap: f64) -> Result<RigidTransform, GeometryError> {
        let first = self
            .poses
            .first()
            .ok_or_else(|| GeometryError::InvalidTrajectory("empty trajectory".into()))?;
        let last = self.poses.last().unwrap();

        let idx = self.poses.partition_point(|p| p.timestamp < t);
        for cand in [idx.wrapping_sub(1), idx] {
            if let Some(p) = self.poses.get(cand) {
                if (p.timestamp - t).abs() <= KNOT_EPS {
                    return Ok(p.pose);
                }
            }
        }
        if t < first.timestamp || t > last.timestamp {
            return Err(GeometryError::OutOfRange {
                t,
                start: first.timestamp,
                end: last.timestamp,
            });
        }
        let hi = &self.poses[idx];
        let lo = &self.poses[idx - 1];
        let gap = hi.timestamp - lo.timestamp;
        if gap > max_gap {
            return Err(GeometryError::GapTooLarge {
                t,
                gap,
                max_gap,
            });
        }
        let tau = (t - lo.timestamp) / gap;
        let translation = lo.pose.translation.vector.lerp(&hi.pose.translation.vector, tau);
        let rotation = slerp_shortest(&lo.pose.rotation, &hi.pose.rotation, tau);
        Ok(RigidTransform::from_parts(translation.into(), rotation))
    }
}

/// Slerp with antipodal correction so interpolation always takes the
/// shortest arc.
fn slerp_shortest(
    q0: &UnitQuaternion<f64>,
    q1: &UnitQuaternion<f64>,
    tau: f64,
) -> UnitQuaternion<f64> {
    let q1 = if q0.coords.dot(&q1.coords) < 0.0 {
        UnitQuaternion::new_unchecked(-q1.into_inner())
    } else {
        *q1
    };
    q0.slerp(&q1, tau)
}
