//! Run configuration: one structured document covering the simulator,
//! detector, scoring table, validation thresholds, and evaluation
//! settings. Unknown keys are rejected; missing keys take the documented
//! defaults, and the fully-resolved configuration is echoed into every
//! output artifact.

use nalgebra::{Quaternion, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::eval::ScoreBrackets;
use crate::geometry::{Point3, RigidTransform};
use crate::sim::{default_ring_elevations, FiducialSpec, ScannerSpec};
use crate::validation::ValidationConfig;

use super::FormatError;

/// Rigid transform on the wire: translation + (qw, qx, qy, qz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub t: [f64; 3],
    pub q: [f64; 4],
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            t: [0.0; 3],
            q: [1.0, 0.0, 0.0, 0.0],
        }
    }
}

impl TransformConfig {
    pub fn from_isometry(tf: &RigidTransform) -> Self {
        let t = tf.translation.vector;
        let q = tf.rotation.quaternion();
        Self {
            t: [t.x, t.y, t.z],
            q: [q.w, q.i, q.j, q.k],
        }
    }

    pub fn to_isometry(&self) -> Result<RigidTransform, FormatError> {
        let [qw, qx, qy, qz] = self.q;
        let q = Quaternion::new(qw, qx, qy, qz);
        if q.norm() < 1e-12 {
            return Err(FormatError::InvalidConfig("zero-norm quaternion".into()));
        }
        Ok(RigidTransform::from_parts(
            Translation3::new(self.t[0], self.t[1], self.t[2]),
            UnitQuaternion::from_quaternion(q),
        ))
    }
}

/// Scanner section; elevations in degrees for readability, `None` means
/// the standard 32-ring hemisphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScannerConfig {
    pub ring_elevations_deg: Option<Vec<f64>>,
    pub samples_per_rev: usize,
    pub mount: TransformConfig,
    pub range_noise_sigma_m: f64,
    pub intensity_noise_sigma: f64,
    pub azimuth_phase_jitter: bool,
    pub intensity_blur: bool,
}

impl Default for ScannerConfig {
    fn default() -> Self {
        let spec = ScannerSpec::default();
        Self {
            ring_elevations_deg: None,
            samples_per_rev: spec.samples_per_rev,
            mount: TransformConfig::from_isometry(&spec.mount_pose),
            range_noise_sigma_m: spec.range_noise_sigma,
            intensity_noise_sigma: spec.intensity_noise_sigma,
            azimuth_phase_jitter: spec.azimuth_phase_jitter,
            intensity_blur: spec.intensity_blur,
        }
    }
}

impl ScannerConfig {
    pub fn to_spec(&self) -> Result<ScannerSpec, FormatError> {
        Ok(ScannerSpec {
            ring_elevations: match &self.ring_elevations_deg {
                Some(degs) => degs.iter().map(|d| d.to_radians()).collect(),
                None => default_ring_elevations(),
            },
            samples_per_rev: self.samples_per_rev,
            mount_pose: self.mount.to_isometry()?,
            range_noise_sigma: self.range_noise_sigma_m,
            intensity_noise_sigma: self.intensity_noise_sigma,
            azimuth_phase_jitter: self.azimuth_phase_jitter,
            intensity_blur: self.intensity_blur,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiducialConfig {
    pub center: [f64; 3],
    pub edge_radii_m: Vec<f64>,
    pub intensity_levels: Vec<f64>,
}

impl Default for FiducialConfig {
    fn default() -> Self {
        let spec = FiducialSpec::default();
        Self {
            center: [spec.center.x, spec.center.y, spec.center.z],
            edge_radii_m: spec.edge_radii,
            intensity_levels: spec.intensity_levels,
        }
    }
}

impl FiducialConfig {
    pub fn to_spec(&self) -> FiducialSpec {
        FiducialSpec {
            center: Point3::new(self.center[0], self.center[1], self.center[2]),
            edge_radii: self.edge_radii_m.clone(),
            intensity_levels: self.intensity_levels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub revolutions: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { revolutions: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Widest knot gap interpolation accepts, seconds.
    pub max_gap_s: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            max_gap_s: crate::geometry::DEFAULT_MAX_GAP,
        }
    }
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scanner: ScannerConfig,
    pub fiducial: FiducialConfig,
    pub sim: SimConfig,
    pub detector: DetectorConfig,
    pub brackets: ScoreBrackets,
    pub validation: ValidationConfig,
    pub evaluation: EvalConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
