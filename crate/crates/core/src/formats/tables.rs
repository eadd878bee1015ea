//! CSV formats: scan exports, GCP survey files, observation files.
//!
//! All files use `#`-prefixed comment lines; fields are comma separated
//! decimal text.

use std::collections::BTreeMap;

use crate::eval::{GcpObservation, GroundControlPoint};
use crate::geometry::Point3;
use crate::sim::{LidarScan, Ring, RingSample};

use super::FormatError;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((idx + 1, line))
        }
    })
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    field.trim().parse().map_err(|_| FormatError::Malformed {
        line,
        message: format!("cannot parse {what} from '{field}'"),
    })
}

/// Scan export: one row per sample,
/// `revolution,ring,azimuth_rad,x,y,z,intensity`.
pub fn scans_to_csv(scans: &[LidarScan]) -> String {
    let mut out = String::from("# revolution,ring,azimuth_rad,x,y,z,intensity\n");
    for scan in scans {
        for ring in &scan.rings {
            for s in &ring.samples {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    scan.revolution,
                    ring.ring_index,
                    s.azimuth,
                    s.point.x,
                    s.point.y,
                    s.point.z,
                    s.intensity
                ));
            }
        }
    }
    out
}

/// Reads a scan CSV back into per-revolution scans. The range channel is
/// reconstructed as the distance from the sensor origin.
pub fn parse_scan_csv(text: &str) -> Result<Vec<LidarScan>, FormatError> {
    let mut grouped: BTreeMap<usize, BTreeMap<usize, Vec<RingSample>>> = BTreeMap::new();
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split(',').collect();
        if fields.len() != 7 {
            return Err(FormatError::Malformed {
                line,
                message: format!("expected 7 columns, found {}", fields.len()),
            });
        }
        let revolution: usize = parse_field(fields[0], line, "revolution")?;
        let ring: usize = parse_field(fields[1], line, "ring")?;
        let azimuth: f64 = parse_field(fields[2], line, "azimuth")?;
        let x: f64 = parse_field(fields[3], line, "x")?;
        let y: f64 = parse_field(fields[4], line, "y")?;
        let z: f64 = parse_field(fields[5], line, "z")?;
        let intensity: f64 = parse_field(fields[6], line, "intensity")?;
        let point = Point3::new(x, y, z);
        grouped
            .entry(revolution)
            .or_default()
            .entry(ring)
            .or_default()
            .push(RingSample {
                azimuth,
                point,
                intensity,
                range: point.coords.norm(),
            });
    }
    Ok(grouped
        .into_iter()
        .map(|(revolution, rings)| LidarScan {
            revolution,
            rings: rings
                .into_iter()
                .map(|(ring_index, samples)| Ring {
                    ring_index,
                    samples,
                })
                .collect(),
        })
        .collect())
}

/// GCP survey file: `name,x,y,z` in the world frame.
pub fn parse_gcps(text: &str) -> Result<Vec<GroundControlPoint>, FormatError> {
    let mut gcps = Vec::new();
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split(',').collect();
        if fields.len() != 4 {
            return Err(FormatError::Malformed {
                line,
                message: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        gcps.push(GroundControlPoint {
            name: fields[0].trim().to_string(),
            position: Point3::new(
                parse_field(fields[1], line, "x")?,
                parse_field(fields[2], line, "y")?,
                parse_field(fields[3], line, "z")?,
            ),
        });
    }
    let mut names: Vec<&str> = gcps.iter().map(|g| g.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(FormatError::Malformed {
            line: 0,
            message: "duplicate GCP names".into(),
        });
    }
    Ok(gcps)
}

pub fn gcps_to_csv(gcps: &[GroundControlPoint]) -> String {
    let mut out = String::from("# name,x,y,z\n");
    for g in gcps {
        out.push_str(&format!(
            "{},{},{},{}\n",
            g.name, g.position.x, g.position.y, g.position.z
        ));
    }
    out
}

/// Observation file: `timestamp,gcp_name,sensor_frame,px,py,pz`.
pub fn parse_observations(text: &str) -> Result<Vec<GcpObservation>, FormatError> {
    let mut observations = Vec::new();
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split(',').collect();
        if fields.len() != 6 {
            return Err(FormatError::Malformed {
                line,
                message: format!("expected 6 columns, found {}", fields.len()),
            });
        }
        observations.push(GcpObservation {
            timestamp: parse_field(fields[0], line, "timestamp")?,
            gcp: fields[1].trim().to_string(),
            sensor_frame: fields[2].trim().to_string(),
            point_in_sensor: Point3::new(
                parse_field(fields[3], line, "px")?,
                parse_field(fields[4], line, "py")?,
                parse_field(fields[5], line, "pz")?,
            ),
        });
    }
    Ok(observations)
}

pub fn observations_to_csv(observations: &[GcpObservation]) -> String {
    let mut out = String::from("# timestamp,gcp_name,sensor_frame,px,py,pz\n");
    for o in observations {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.timestamp,
            o.gcp,
            o.sensor_frame,
            o.point_in_sensor.x,
            o.point_in_sensor.y,
            o.point_in_sensor.z
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Plane, Vector3};
    use crate::sim::{simulate_scan, FiducialSpec, ScannerSpec};

    #[test]
    fn scan_csv_round_trip_is_lossless() {
        let scanner = ScannerSpec {
            samples_per_rev: 360,
            ring_elevations: (1..=8).map(|k| -(k as f64) * 0.15).collect(),
            intensity_noise_sigma: 0.05,
            ..ScannerSpec::default()
        };
        let ground = Plane::from_normal_offset(Vector3::z(), 0.0).unwrap();
        let scans = simulate_scan(&scanner, &ground, &FiducialSpec::default(), 2, 3).unwrap();
        let csv = scans_to_csv(&scans);
        let back = parse_scan_csv(&csv).unwrap();
        assert_eq!(scans.len(), back.len());
        for (a, b) in scans.iter().zip(&back) {
            assert_eq!(a.revolution, b.revolution);
            for (ra, rb) in a.rings.iter().zip(&b.rings) {
                assert_eq!(ra.ring_index, rb.ring_index);
                assert_eq!(ra.samples.len(), rb.samples.len());
                for (sa, sb) in ra.samples.iter().zip(&rb.samples) {
                    assert_eq!(sa.azimuth, sb.azimuth);
                    assert_eq!(sa.point, sb.point);
                    assert_eq!(sa.intensity, sb.intensity);
                }
            }
        }
    }

    #[test]
    fn gcp_csv_round_trip_and_duplicate_names() {
        let text = "# name,x,y,z\nA,1.0,2.0,0.0\nB,-0.5,0.25,0.125\n";
        let gcps = parse_gcps(text).unwrap();
        assert_eq!(gcps.len(), 2);
        assert_eq!(gcps[1].position, Point3::new(-0.5, 0.25, 0.125));
        let back = parse_gcps(&gcps_to_csv(&gcps)).unwrap();
        assert_eq!(gcps[0].position, back[0].position);

        assert!(parse_gcps("A,0,0,0\nA,1,1,1\n").is_err());
    }

    #[test]
    fn observation_csv_round_trip() {
        let observations = vec![GcpObservation {
            timestamp: 12.25,
            gcp: "g1".into(),
            sensor_frame: "lidar".into(),
            point_in_sensor: Point3::new(0.1, -0.2, 0.3),
        }];
        let back = parse_observations(&observations_to_csv(&observations)).unwrap();
        assert_eq!(observations[0].timestamp, back[0].timestamp);
        assert_eq!(observations[0].point_in_sensor, back[0].point_in_sensor);
        assert_eq!(back[0].sensor_frame, "lidar");
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let err = parse_scan_csv("# header\n0,0,0,0,0,0\n").unwrap_err();
        match err {
            FormatError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
