//! Circular-fiducial center estimation from multi-ring LiDAR scans.
//!
//! Pipeline: crop the region of interest, fit the ground plane, project
//! each ring into the plane chart, detect intensity edges per ring with a
//! 1D Canny detector, vote circles of the known fiducial radii into a
//! Hough accumulator, smooth the accumulator, and lift the refined argmax
//! back to 3D.
//!
//! Edge detection per ring and voting per scan are independent; merged
//! accumulators are an associative sum, so the stages parallelize
//! naturally. Identical scans and config produce bitwise-identical
//! results.

mod canny;
mod hough;

pub use canny::{detect_edges, EdgePoint};
pub use hough::{hough_vote, HoughAccumulator};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::rayleigh_fit;
use crate::geometry::{
    alignment_residuals, fit_plane, GeometryError, Plane, Point3,
};
use crate::sim::LidarScan;

/// Smallest angle (cosine) between the fitted normal and the scanner up
/// axis for a plane to count as floor-like.
const FLOOR_NORMAL_MIN_COS: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Support tolerance for the vote count, in cells: a circle hypothesis
/// supports the detection if it passes this close to the refined center.
const SUPPORT_TOL_CELLS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectorError {
    #[error("empty region of interest")]
    EmptyRoi,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no detection: {votes} supporting votes, need {min_votes}")]
    NoDetection { votes: usize, min_votes: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

/// Free parameters of the detection pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Horizontal ROI center in the lidar frame, meters. `None` means the
    /// scans are already cropped.
    pub roi_center_hint: Option<(f64, f64)>,
    /// ROI crop radius around the hint, meters.
    pub roi_radius: f64,
    /// Accumulator cell size, meters.
    pub hough_cell_size: f64,
    /// Accumulator half-width, meters.
    pub hough_extent: f64,
    /// Gaussian smoothing of ring intensity, in samples.
    pub canny_smooth_sigma: f64,
    /// Hysteresis thresholds as fractions of the ring's max |gradient|.
    pub canny_high_frac: f64,
    pub canny_low_frac: f64,
    /// Accumulator smoothing, in cells.
    pub blur_sigma: f64,
    /// Circle radii to vote, meters; must match the fiducial edge radii.
    pub radii: Vec<f64>,
    /// Minimum supporting circle hypotheses; `None` = 3 × radii count.
    pub min_votes: Option<usize>,
    /// Sub-cell refinement by 3x3 weighted centroid after the blur.
    /// Disable to return the raw argmax cell center.
    pub refine_subcell: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            roi_center_hint: None,
            roi_radius: 0.5,
            hough_cell_size: 0.002,
            hough_extent: 0.5,
            canny_smooth_sigma: 2.0,
            canny_high_frac: 0.5,
            canny_low_frac: 0.2,
            blur_sigma: 2.0,
            radii: vec![0.10, 0.15],
            min_votes: None,
            refine_subcell: true,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.hough_cell_size <= 0.0 || self.hough_extent <= 0.0 {
            return Err(DetectorError::InvalidConfig(
                "hough cell size and extent must be positive".into(),
            ));
        }
        if !(0.0 < self.canny_low_frac
            && self.canny_low_frac < self.canny_high_frac
            && self.canny_high_frac <= 1.0)
        {
            return Err(DetectorError::InvalidConfig(
                "need 0 < canny_low_frac < canny_high_frac <= 1".into(),
            ));
        }
        if self.radii.is_empty() || self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DetectorError::InvalidConfig(
                "radii must be non-empty and increasing".into(),
            ));
        }
        if self.canny_smooth_sigma < 0.0 || self.blur_sigma < 0.0 || self.roi_radius < 0.0 {
            return Err(DetectorError::InvalidConfig(
                "sigmas and roi radius must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_min_votes(&self) -> usize {
        self.min_votes.unwrap_or(3 * self.radii.len())
    }
}

/// A detected fiducial center.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Center in the lidar frame; equals `plane.lift(in_plane_center)`.
    pub center: Point3,
    pub in_plane_center: (f64, f64),
    /// Count of (edge, radius) circle hypotheses passing within two cells
    /// of the detected center.
    pub votes: f64,
    pub plane: Plane,
    pub edge_count: usize,
}

/// Retains samples whose horizontal (x, y) distance to the hint is at most
/// `roi_radius`, preserving ring sample order. With no hint the scans pass
/// through unchanged. Errors if nothing remains.
pub fn crop_roi(scans: &[LidarScan], cfg: &DetectorConfig) -> Result<Vec<LidarScan>, DetectorError> {
    let cropped: Vec<LidarScan> = match cfg.roi_center_hint {
        None => scans.to_vec(),
        Some((hx, hy)) => scans
            .iter()
            .map(|scan| LidarScan {
                revolution: scan.revolution,
                rings: scan
                    .rings
                    .iter()
                    .map(|ring| crate::sim::Ring {
                        ring_index: ring.ring_index,
                        samples: ring
                            .samples
                            .iter()
                            .filter(|s| {
                                let dx = s.point.x - hx;
                                let dy = s.point.y - hy;
                                (dx * dx + dy * dy).sqrt() <= cfg.roi_radius
                            })
                            .copied()
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    if cropped.iter().map(LidarScan::sample_count).sum::<usize>() == 0 {
        return Err(DetectorError::EmptyRoi);
    }
    Ok(cropped)
}

/// Runs the full detection pipeline over one or more scans.
pub fn detect_gcp(scans: &[LidarScan], cfg: &DetectorConfig) -> Result<DetectionResult, DetectorError> {
    cfg.validate()?;
    let cropped = crop_roi(scans, cfg)?;

    let points: Vec<Point3> = cropped
        .iter()
        .flat_map(|s| s.rings.iter())
        .flat_map(|r| r.samples.iter().map(|s| s.point))
        .collect();
    let (plane, _) = fit_plane(&points, None)?;
    if plane.normal().z < FLOOR_NORMAL_MIN_COS {
        return Err(GeometryError::DegenerateInput(format!(
            "fitted plane is not floor-like (normal z = {:.3})",
            plane.normal().z
        ))
        .into());
    }

    let acc_center = accumulator_center(&plane, &points, cfg);
    let mut acc = HoughAccumulator::new(acc_center, cfg.hough_extent, cfg.hough_cell_size);

    let mut edges: Vec<EdgePoint> = Vec::new();
    for (scan_idx, scan) in cropped.iter().enumerate() {
        let mut scan_edges: Vec<EdgePoint> = Vec::new();
        for ring in &scan.rings {
            let mut ring_edges = detect_edges(ring, &plane, cfg);
            for e in &mut ring_edges {
                e.scan = scan_idx;
            }
            scan_edges.extend(ring_edges);
        }
        hough_vote(&mut acc, &scan_edges, &cfg.radii);
        edges.extend(scan_edges);
    }

    let blurred = acc.blurred(cfg.blur_sigma);
    let (ix, iy, _) = blurred.argmax();
    let (u, v) = if cfg.refine_subcell {
        centroid_3x3(&blurred, ix, iy)
    } else {
        blurred.cell_center(ix, iy)
    };

    let tol = SUPPORT_TOL_CELLS * cfg.hough_cell_size;
    let votes = edges
        .iter()
        .flat_map(|e| cfg.radii.iter().map(move |r| (e, *r)))
        .filter(|(e, r)| {
            let d = ((e.u - u).powi(2) + (e.v - v).powi(2)).sqrt();
            (d - r).abs() <= tol
        })
        .count();
    let min_votes = cfg.effective_min_votes();
    if votes < min_votes {
        return Err(DetectorError::NoDetection { votes, min_votes });
    }

    Ok(DetectionResult {
        center: plane.lift(u, v),
        in_plane_center: (u, v),
        votes: votes as f64,
        plane,
        edge_count: edges.len(),
    })
}

/// Same pipeline, but also returns the raw (pre-blur) accumulator for
/// diagnostics dumps.
pub fn detect_gcp_with_accumulator(
    scans: &[LidarScan],
    cfg: &DetectorConfig,
) -> Result<(DetectionResult, HoughAccumulator), DetectorError> {
    // Re-running the vote stage is cheap relative to simulation; keep the
    // main path allocation-lean and rebuild here.
    let result = detect_gcp(scans, cfg)?;
    let cropped = crop_roi(scans, cfg)?;
    let acc_center = {
        let points: Vec<Point3> = cropped
            .iter()
            .flat_map(|s| s.rings.iter())
            .flat_map(|r| r.samples.iter().map(|s| s.point))
            .collect();
        accumulator_center(&result.plane, &points, cfg)
    };
    let mut acc = HoughAccumulator::new(acc_center, cfg.hough_extent, cfg.hough_cell_size);
    for (scan_idx, scan) in cropped.iter().enumerate() {
        let mut scan_edges: Vec<EdgePoint> = Vec::new();
        for ring in &scan.rings {
            let mut ring_edges = detect_edges(ring, &result.plane, cfg);
            for e in &mut ring_edges {
                e.scan = scan_idx;
            }
            scan_edges.extend(ring_edges);
        }
        hough_vote(&mut acc, &scan_edges, &cfg.radii);
    }
    Ok((result, acc))
}

/// Accumulator center: the ROI hint dropped vertically onto the plane, or
/// the projected centroid of the cropped cloud when no hint is given.
fn accumulator_center(plane: &Plane, points: &[Point3], cfg: &DetectorConfig) -> (f64, f64) {
    match cfg.roi_center_hint {
        Some((hx, hy)) => {
            let n = plane.normal();
            // n.z is bounded away from zero by the floor gate.
            let z = -(plane.offset() + n.x * hx + n.y * hy) / n.z;
            plane.project_point(&Point3::new(hx, hy, z))
        }
        None => {
            let n = points.len() as f64;
            let c = points
                .iter()
                .fold(nalgebra::Vector3::zeros(), |a, p| a + p.coords)
                / n;
            plane.project_point(&Point3::from(c))
        }
    }
}

/// Weighted centroid of the 3x3 neighborhood around the argmax cell.
fn centroid_3x3(acc: &HoughAccumulator, ix: i64, iy: i64) -> (f64, f64) {
    let mut wsum = 0.0;
    let mut usum = 0.0;
    let mut vsum = 0.0;
    for dy in -1..=1 {
        for dx in -1..=1 {
            let w = acc.weight_at(ix + dx, iy + dy);
            let (u, v) = acc.cell_center(ix + dx, iy + dy);
            wsum += w;
            usum += w * u;
            vsum += w * v;
        }
    }
    if wsum <= 0.0 {
        acc.cell_center(ix, iy)
    } else {
        (usum / wsum, vsum / wsum)
    }
}

/// Summary statistics of a grid accuracy evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridStats {
    /// Post-alignment 3-DoF errors, meters, input order.
    pub errors: Vec<f64>,
    pub median: f64,
    pub max: f64,
    pub r95: f64,
    pub r997: f64,
}

/// Aligns detections to the surveyed grid (rigid least squares) and
/// reports per-point errors with Rayleigh R95/R99.7 statistics.
pub fn evaluate_detector_grid(
    grid_points: &[Point3],
    detections: &[Point3],
) -> Result<GridStats, GeometryError> {
    let errors = alignment_residuals(grid_points, detections)?;
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let max = sorted[n - 1];
    let fit = rayleigh_fit(&errors)
        .map_err(|e| GeometryError::DegenerateInput(e.to_string()))?;
    Ok(GridStats {
        errors,
        median,
        max,
        r95: fit.quantile(0.95),
        r997: fit.quantile(0.997),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RigidTransform, Vector3};
    use crate::sim::{simulate_scan, FiducialSpec, ScannerSpec};

    fn ground() -> Plane {
        Plane::from_normal_offset(Vector3::z(), 0.0).unwrap()
    }

    /// Small, fast scene used by the unit tests.
    fn test_scene(
        center: Point3,
        noise: f64,
        revolutions: usize,
        seed: u64,
    ) -> (Vec<crate::sim::LidarScan>, ScannerSpec, FiducialSpec) {
        let scanner = ScannerSpec {
            samples_per_rev: 1800,
            range_noise_sigma: noise,
            intensity_noise_sigma: 0.0,
            azimuth_phase_jitter: revolutions > 1,
            ..ScannerSpec::default()
        };
        let fiducial = FiducialSpec {
            center,
            ..FiducialSpec::default()
        };
        let scans = simulate_scan(&scanner, &ground(), &fiducial, revolutions, seed).unwrap();
        (scans, scanner, fiducial)
    }

    fn hinted_cfg(center: Point3) -> DetectorConfig {
        DetectorConfig {
            roi_center_hint: Some((center.x, center.y)),
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn noiseless_scene_detected_within_two_cells() {
        let center = Point3::new(0.30, 0.20, 0.0);
        let (scans, scanner, _) = test_scene(center, 0.0, 3, 0);
        let cfg = hinted_cfg(center);
        let det = detect_gcp(&scans, &cfg).unwrap();
        let truth = scanner.mount_pose.inverse() * center;
        let err = (det.center - truth).norm();
        assert!(
            err <= 2.0 * cfg.hough_cell_size,
            "error {err} exceeds two cells"
        );
        // Result invariant: center must lie on the fitted plane chart.
        let lifted = det
            .plane
            .lift(det.in_plane_center.0, det.in_plane_center.1);
        assert!((det.center - lifted).norm() < 1e-12);
    }

    #[test]
    fn constant_intensity_yields_no_detection() {
        let center = Point3::new(0.6, 0.0, 0.0);
        let scanner = ScannerSpec {
            range_noise_sigma: 0.0,
            azimuth_phase_jitter: false,
            ..ScannerSpec::default()
        };
        // Uniform reflectivity everywhere: no edges to vote.
        let fiducial = FiducialSpec {
            center,
            intensity_levels: vec![0.2, 0.2, 0.2],
            ..FiducialSpec::default()
        };
        let scans = simulate_scan(&scanner, &ground(), &fiducial, 1, 0).unwrap();
        assert!(matches!(
            detect_gcp(&scans, &hinted_cfg(center)),
            Err(DetectorError::NoDetection { .. })
        ));
    }

    #[test]
    fn crop_roi_behaviour() {
        let center = Point3::new(0.6, 0.0, 0.0);
        let (scans, scanner, fid) = test_scene(center, 0.0, 1, 0);
        // Radius 0 keeps nothing.
        let mut cfg = hinted_cfg(center);
        cfg.roi_radius = 0.0;
        assert!(matches!(crop_roi(&scans, &cfg), Err(DetectorError::EmptyRoi)));
        // Infinite radius is the identity.
        cfg.roi_radius = f64::INFINITY;
        let kept = crop_roi(&scans, &cfg).unwrap();
        assert_eq!(kept[0].sample_count(), scans[0].sample_count());
        // Default radius keeps every sample on the fiducial disc.
        cfg.roi_radius = 0.5;
        let kept = crop_roi(&scans, &cfg).unwrap();
        let lidar_center = scanner.mount_pose.inverse() * fid.center;
        let on_disc = |s: &crate::sim::RingSample| {
            (s.point - lidar_center).norm() <= fid.edge_radii[0]
        };
        let total_disc: usize = scans[0]
            .rings
            .iter()
            .flat_map(|r| r.samples.iter())
            .filter(|s| on_disc(s))
            .count();
        let kept_disc: usize = kept[0]
            .rings
            .iter()
            .flat_map(|r| r.samples.iter())
            .filter(|s| on_disc(s))
            .count();
        assert!(total_disc > 0);
        assert_eq!(total_disc, kept_disc);
    }

    #[test]
    fn detection_is_deterministic() {
        let center = Point3::new(0.55, -0.1, 0.0);
        let (scans, _, _) = test_scene(center, 0.02, 4, 9);
        let cfg = hinted_cfg(center);
        let a = detect_gcp(&scans, &cfg).unwrap();
        let b = detect_gcp(&scans, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn intensity_scaling_leaves_center_unchanged() {
        let center = Point3::new(0.5, 0.15, 0.0);
        let (mut scans, _, _) = test_scene(center, 0.0, 2, 4);
        let cfg = hinted_cfg(center);
        let base = detect_gcp(&scans, &cfg).unwrap();
        for scan in &mut scans {
            for ring in &mut scan.rings {
                for s in &mut ring.samples {
                    s.intensity *= 12.3;
                }
            }
        }
        let scaled = detect_gcp(&scans, &cfg).unwrap();
        assert_eq!(base.edge_count, scaled.edge_count);
        assert!((base.center - scaled.center).norm() < 1e-12);
    }

    /// Voting with both fiducial radii must out-vote single-radius voting
    /// at the same center when both boundaries carry contrast.
    #[test]
    fn dual_radius_voting_beats_single_radius() {
        let center = Point3::new(0.55, 0.0, 0.0);
        let scanner = ScannerSpec {
            range_noise_sigma: 0.0,
            azimuth_phase_jitter: true,
            ..ScannerSpec::default()
        };
        let fiducial = FiducialSpec {
            center,
            intensity_levels: vec![0.9, 0.2, 0.6],
            ..FiducialSpec::default()
        };
        let scans = simulate_scan(&scanner, &ground(), &fiducial, 5, 2).unwrap();
        let dual = detect_gcp(&scans, &hinted_cfg(center)).unwrap();
        let single_cfg = DetectorConfig {
            radii: vec![0.10],
            ..hinted_cfg(center)
        };
        let single = detect_gcp(&scans, &single_cfg).unwrap();
        assert!(
            dual.votes > single.votes,
            "dual {} vs single {}",
            dual.votes,
            single.votes
        );
    }

    /// Adding noiseless revolutions never degrades the center by more than
    /// one cell.
    #[test]
    fn monotone_refinement_over_revolutions() {
        let center = Point3::new(0.45, 0.1, 0.0);
        let scanner = ScannerSpec {
            range_noise_sigma: 0.0,
            azimuth_phase_jitter: true,
            ..ScannerSpec::default()
        };
        let fiducial = FiducialSpec {
            center,
            ..FiducialSpec::default()
        };
        let cfg = hinted_cfg(center);
        let truth = scanner.mount_pose.inverse() * center;
        let mut prev_err = f64::INFINITY;
        for revs in [1usize, 2, 4, 8] {
            let scans = simulate_scan(&scanner, &ground(), &fiducial, revs, 11).unwrap();
            let det = detect_gcp(&scans, &cfg).unwrap();
            let err = (det.center - truth).norm();
            assert!(
                err <= prev_err + cfg.hough_cell_size,
                "revs {revs}: error {err} vs previous {prev_err}"
            );
            prev_err = err;
        }
    }

    #[test]
    fn wall_scene_rejected_as_degenerate() {
        // Vertical plane in front of the scanner instead of a floor.
        let scanner = ScannerSpec {
            ring_elevations: (0..16).map(|k| -(k as f64) * 0.05 - 0.02).collect(),
            mount_pose: RigidTransform::identity(),
            range_noise_sigma: 0.0,
            azimuth_phase_jitter: false,
            ..ScannerSpec::default()
        };
        let wall = Plane::from_normal_offset(Vector3::x(), -2.0).unwrap();
        let fiducial = FiducialSpec {
            center: Point3::new(2.0, 0.0, -0.5),
            ..FiducialSpec::default()
        };
        let scans = simulate_scan(&scanner, &wall, &fiducial, 1, 0).unwrap();
        let cfg = DetectorConfig {
            roi_center_hint: Some((2.0, 0.0)),
            ..DetectorConfig::default()
        };
        assert!(matches!(
            detect_gcp(&scans, &cfg),
            Err(DetectorError::Geometry(GeometryError::DegenerateInput(_)))
        ));
    }

    #[test]
    fn grid_stats_zero_for_exact_detections() {
        let grid: Vec<Point3> = (0..6)
            .map(|k| Point3::new((k % 3) as f64 * 0.2, (k / 3) as f64 * 0.2, 0.0))
            .collect();
        let stats = evaluate_detector_grid(&grid, &grid).unwrap();
        assert!(stats.median < 1e-12 && stats.max < 1e-12);
        // Rigidly moved detections keep all statistics at zero.
        let t = RigidTransform::new(Vector3::new(0.3, -0.1, 0.2), Vector3::z() * 0.5);
        let moved: Vec<Point3> = grid.iter().map(|p| t * p).collect();
        let stats = evaluate_detector_grid(&grid, &moved).unwrap();
        assert!(stats.max < 1e-9);
        assert!(stats.r997 < 1e-9);
    }
}
