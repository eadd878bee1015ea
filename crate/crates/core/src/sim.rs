//! Deterministic synthetic hemispherical multi-ring scanner over a planar
//! scene containing a circular reflective fiducial.
//!
//! The scene is a ground plane plus one fiducial made of concentric
//! constant-reflectivity annuli with sharp edges. Range noise is applied
//! along the ray (the way a rangefinder errs); intensity is sampled at the
//! noiseless hit point so reflectivity edges stay geometrically faithful
//! while range noise perturbs 3D positions — the two error sources stay
//! separable for testing. Everything is a pure function of the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::{Plane, Point3, RigidTransform, Vector3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scanner spec: {0}")]
    InvalidScanner(String),
    #[error("invalid fiducial spec: {0}")]
    InvalidFiducial(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Hemispherical multi-ring scanner description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScannerSpec {
    /// Per-ring elevation angles, radians, strictly decreasing
    /// (0 = horizontal, -pi/2 = straight down).
    pub ring_elevations: Vec<f64>,
    /// Azimuth samples per revolution.
    pub samples_per_rev: usize,
    /// Mount pose, world ← lidar.
    pub mount_pose: RigidTransform,
    /// 1-sigma range noise along the ray, meters.
    pub range_noise_sigma: f64,
    /// 1-sigma additive intensity noise.
    pub intensity_noise_sigma: f64,
    /// Per-revolution random azimuth phase; models time-based triggering,
    /// where successive revolutions sample at slightly different angles.
    pub azimuth_phase_jitter: bool,
    /// Optional one-sample Gaussian blur of reflectivity across azimuth,
    /// a crude beam-footprint model.
    pub intensity_blur: bool,
}

impl Default for ScannerSpec {
    fn default() -> Self {
        Self {
            ring_elevations: default_ring_elevations(),
            samples_per_rev: 1800,
            mount_pose: RigidTransform::translation(0.0, 0.0, 0.5),
            range_noise_sigma: 0.03,
            intensity_noise_sigma: 0.0,
            azimuth_phase_jitter: true,
            intensity_blur: false,
        }
    }
}

/// 32 rings spanning 0 … -90 degrees.
pub fn default_ring_elevations() -> Vec<f64> {
    (0..32)
        .map(|k| -(k as f64) * (90.0f64 / 31.0).to_radians())
        .collect()
}

impl ScannerSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.ring_elevations.is_empty() {
            return Err(SimError::InvalidScanner("no rings".into()));
        }
        if self
            .ring_elevations
            .windows(2)
            .any(|w| !(w[1] < w[0]))
        {
            return Err(SimError::InvalidScanner(
                "ring elevations must be strictly decreasing".into(),
            ));
        }
        if self.samples_per_rev < 8 {
            return Err(SimError::InvalidScanner(
                "samples_per_rev must be at least 8".into(),
            ));
        }
        if self.range_noise_sigma < 0.0 || self.intensity_noise_sigma < 0.0 {
            return Err(SimError::InvalidScanner("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Circular fiducial: concentric annuli with sharp reflectivity edges.
///
/// `intensity_levels[i]` is the reflectivity inside `edge_radii[i]`
/// (inner disc first); the last level is the background beyond the
/// outermost radius, so `intensity_levels.len() == edge_radii.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiducialSpec {
    /// Center, on the ground plane, world frame.
    pub center: Point3,
    /// Annulus boundary radii, meters, strictly increasing.
    pub edge_radii: Vec<f64>,
    /// Reflectivity per annulus, inside-out, each in [0, 1].
    pub intensity_levels: Vec<f64>,
}

impl Default for FiducialSpec {
    fn default() -> Self {
        // Bright disc inside a dark ring border on a dark background.
        Self {
            center: Point3::new(0.6, 0.0, 0.0),
            edge_radii: vec![0.10, 0.15],
            intensity_levels: vec![0.9, 0.2, 0.2],
        }
    }
}

impl FiducialSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.edge_radii.is_empty() {
            return Err(SimError::InvalidFiducial("no edge radii".into()));
        }
        if self.edge_radii[0] <= 0.0
            || self.edge_radii.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(SimError::InvalidFiducial(
                "edge radii must be strictly increasing and positive".into(),
            ));
        }
        if self.intensity_levels.len() != self.edge_radii.len() + 1 {
            return Err(SimError::InvalidFiducial(format!(
                "need {} intensity levels for {} radii",
                self.edge_radii.len() + 1,
                self.edge_radii.len()
            )));
        }
        if self
            .intensity_levels
            .iter()
            .any(|l| !(0.0..=1.0).contains(l))
        {
            return Err(SimError::InvalidFiducial(
                "intensity levels must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Reflectivity at in-plane distance `dist` from the center.
    pub fn reflectivity(&self, dist: f64) -> f64 {
        for (r, level) in self.edge_radii.iter().zip(&self.intensity_levels) {
            if dist < *r {
                return *level;
            }
        }
        *self.intensity_levels.last().unwrap()
    }
}

/// The surveyed ground-truth position of the fiducial.
pub fn ground_truth_center(fiducial: &FiducialSpec) -> Point3 {
    fiducial.center
}

/// One sample of one ring, in the lidar frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSample {
    pub azimuth: f64,
    pub point: Point3,
    pub intensity: f64,
    pub range: f64,
}

/// All samples produced by one laser channel during one revolution,
/// ordered by azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    pub ring_index: usize,
    pub samples: Vec<RingSample>,
}

/// One scanner revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub revolution: usize,
    pub rings: Vec<Ring>,
}

impl LidarScan {
    pub fn sample_count(&self) -> usize {
        self.rings.iter().map(|r| r.samples.len()).sum()
    }
}

/// Simulates `revolutions` scans of the scene. Rays that miss the ground
/// plane (parallel or pointing away) are omitted. Fully deterministic
/// given the seed.
pub fn simulate_scan(
    scanner: &ScannerSpec,
    ground: &Plane,
    fiducial: &FiducialSpec,
    revolutions: usize,
    seed: u64,
) -> Result<Vec<LidarScan>, SimError> {
    scanner.validate()?;
    fiducial.validate()?;
    if revolutions == 0 {
        return Err(SimError::InvalidScene("revolutions must be >= 1".into()));
    }
    if ground.signed_distance(&fiducial.center).abs() > 1e-6 {
        return Err(SimError::InvalidScene(
            "fiducial center must lie on the ground plane".into(),
        ));
    }

    // Work in the lidar frame: rays start at the origin.
    let world_from_lidar = scanner.mount_pose;
    let lidar_from_world = world_from_lidar.inverse();
    let plane = ground.transformed(&lidar_from_world);
    let center = lidar_from_world * fiducial.center;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_az = scanner.samples_per_rev;
    let step = std::f64::consts::TAU / n_az as f64;

    let mut scans = Vec::with_capacity(revolutions);
    for revolution in 0..revolutions {
        let phase = if scanner.azimuth_phase_jitter {
            rng.gen::<f64>() * step
        } else {
            0.0
        };
        // One trig table per revolution, shared by all rings.
        let az_table: Vec<(f64, f64, f64)> = (0..n_az)
            .map(|k| {
                let az = phase + k as f64 * step;
                let (s, c) = az.sin_cos();
                (az, c, s)
            })
            .collect();

        let mut rings = Vec::with_capacity(scanner.ring_elevations.len());
        for (ring_index, &elev) in scanner.ring_elevations.iter().enumerate() {
            let (sin_e, cos_e) = elev.sin_cos();
            let mut hits: Vec<(f64, f64, f64, Vector3)> = Vec::new();
            for &(az, cos_a, sin_a) in &az_table {
                let dir = Vector3::new(cos_e * cos_a, cos_e * sin_a, sin_e);
                let denom = plane.normal().dot(&dir);
                if denom.abs() < 1e-12 {
                    continue;
                }
                let t = -plane.offset() / denom;
                if !(t > 0.0) || !t.is_finite() {
                    continue;
                }
                let hit = Point3::from(t * dir);
                let dist = (hit - center).norm();
                hits.push((az, t, fiducial.reflectivity(dist), dir));
            }
            if scanner.intensity_blur {
                blur_intensity(&mut hits);
            }
            let samples = hits
                .into_iter()
                .map(|(azimuth, t, reflect, dir)| {
                    let range_eps: f64 = rng.sample(StandardNormal);
                    let int_eps: f64 = rng.sample(StandardNormal);
                    let range = t + range_eps * scanner.range_noise_sigma;
                    let intensity = (reflect + int_eps * scanner.intensity_noise_sigma)
                        .clamp(0.0, 1.0 + 3.0 * scanner.intensity_noise_sigma);
                    RingSample {
                        azimuth,
                        point: Point3::from(range * dir),
                        intensity,
                        range,
                    }
                })
                .collect();
            rings.push(Ring {
                ring_index,
                samples,
            });
        }
        scans.push(LidarScan { revolution, rings });
    }
    Ok(scans)
}

/// Single-sample Gaussian blur of the reflectivity channel across azimuth.
fn blur_intensity(hits: &mut [(f64, f64, f64, Vector3)]) {
    if hits.len() < 3 {
        return;
    }
    let kernel = [0.27406862, 0.45186276, 0.27406862]; // sigma = 1 sample
    let original: Vec<f64> = hits.iter().map(|h| h.2).collect();
    let n = hits.len();
    for i in 0..n {
        let left = original[i.saturating_sub(1).min(n - 1)];
        let right = original[(i + 1).min(n - 1)];
        hits[i].2 = kernel[0] * left + kernel[1] * original[i] + kernel[2] * right;
    }
}
