//! Calibration JSON: a map from sensor-frame name to IMU ← sensor
//! extrinsics, `{"frame": {"t": [x, y, z], "q": [qw, qx, qy, qz]}}`.
//! Participant-supplied files override the benchmark defaults per frame.

use std::collections::BTreeMap;

use nalgebra::{Quaternion, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::eval::CalibrationSet;
use crate::geometry::RigidTransform;

use super::{FormatError, TransformConfig};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    t: [f64; 3],
    q: [f64; 4],
}

/// Parses a calibration JSON document into a calibration set.
pub fn parse_calibration(text: &str) -> Result<CalibrationSet, FormatError> {
    let raw: BTreeMap<String, Entry> = serde_json::from_str(text)?;
    let mut set = CalibrationSet::new();
    for (frame, e) in raw {
        let [qw, qx, qy, qz] = e.q;
        let q = Quaternion::new(qw, qx, qy, qz);
        if q.norm() < 1e-12 {
            return Err(FormatError::InvalidConfig(format!(
                "frame '{frame}': zero-norm quaternion"
            )));
        }
        set.insert(
            frame,
            RigidTransform::from_parts(
                Translation3::new(e.t[0], e.t[1], e.t[2]),
                UnitQuaternion::from_quaternion(q),
            ),
        );
    }
    Ok(set)
}

/// Serializes a calibration set to the JSON wire format.
pub fn calibration_to_json(set: &CalibrationSet) -> String {
    let raw: BTreeMap<String, TransformConfig> = set
        .iter()
        .map(|(frame, tf)| (frame.clone(), TransformConfig::from_isometry(tf)))
        .collect();
    serde_json::to_string_pretty(&raw).expect("calibration serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    #[test]
    fn parse_and_round_trip() {
        let text = r#"{"lidar": {"t": [0.1, -0.2, 0.05], "q": [1.0, 0.0, 0.0, 0.0]}}"#;
        let set = parse_calibration(text).unwrap();
        let tf = set.get("lidar").unwrap();
        assert_eq!(tf.translation.vector, Vector3::new(0.1, -0.2, 0.05));
        let back = parse_calibration(&calibration_to_json(&set)).unwrap();
        assert_eq!(set.get("lidar"), back.get("lidar"));
    }

    #[test]
    fn overrides_merge_per_frame() {
        let defaults = CalibrationSet::identity_defaults();
        let user = parse_calibration(
            r#"{"lidar": {"t": [0.0, 0.0, 1.0], "q": [1.0, 0.0, 0.0, 0.0]}}"#,
        )
        .unwrap();
        let merged = defaults.merged_with(&user);
        assert_eq!(
            merged.get("lidar").unwrap().translation.vector.z,
            1.0
        );
        // The untouched default survives.
        assert!(merged.get("tip").is_some());
    }

    #[test]
    fn bad_documents_rejected() {
        assert!(parse_calibration("not json").is_err());
        assert!(parse_calibration(r#"{"lidar": {"t": [0,0,0], "q": [0,0,0,0]}}"#).is_err());
        assert!(
            parse_calibration(r#"{"lidar": {"t": [0,0,0], "q": [1,0,0,0], "x": 1}}"#).is_err()
        );
    }
}
