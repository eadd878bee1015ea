//! Total-least-squares plane fitting with an optional RANSAC consensus
//! stage, and projection into a deterministic in-plane basis.

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GeometryError, Point3, RigidTransform, Vector3};

/// Fixed seed for the internal RANSAC sampler; the public signature has no
/// RNG so the fit stays bitwise deterministic.
const RANSAC_SEED: u64 = 0x9e3779b97f4a7c15;

/// Relative eigenvalue floor below which the point set is treated as
/// collinear (no unique plane).
const RANK_EPS: f64 = 1e-12;

/// An oriented plane with a right-handed orthonormal in-plane basis.
///
/// Points on the plane satisfy `normal · p + offset = 0`, i.e. `offset` is
/// the signed distance of the origin from the plane along the normal.
/// The basis `(u, v, normal)` is derived deterministically from the
/// normal, so in-plane coordinates are reproducible across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    normal: Vector3,
    offset: f64,
    basis_u: Vector3,
    basis_v: Vector3,
}

impl Plane {
    /// Builds a plane from a (not necessarily unit) normal and offset.
    pub fn from_normal_offset(normal: Vector3, offset: f64) -> Result<Self, GeometryError> {
        let norm = normal.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(GeometryError::DegenerateInput(
                "plane normal must be non-zero".into(),
            ));
        }
        let n = normal / norm;
        let (basis_u, basis_v) = in_plane_basis(&n);
        Ok(Self {
            normal: n,
            offset: offset / norm,
            basis_u,
            basis_v,
        })
    }

    pub fn normal(&self) -> Vector3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn basis_u(&self) -> Vector3 {
        self.basis_u
    }

    pub fn basis_v(&self) -> Vector3 {
        self.basis_v
    }

    /// Signed orthogonal distance of `p` from the plane.
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }

    /// Foot of the coordinate origin on the plane; the origin of the
    /// in-plane (u, v) chart.
    pub fn anchor(&self) -> Point3 {
        Point3::from(-self.offset * self.normal)
    }

    /// Orthogonal projection of `p` expressed in the (u, v) basis.
    pub fn project_point(&self, p: &Point3) -> (f64, f64) {
        let w = p - self.anchor();
        (w.dot(&self.basis_u), w.dot(&self.basis_v))
    }

    /// Maps in-plane coordinates back to the 3D point on the plane.
    pub fn lift(&self, u: f64, v: f64) -> Point3 {
        self.anchor() + u * self.basis_u + v * self.basis_v
    }

    /// Closest point on the plane to `p`.
    pub fn closest_point(&self, p: &Point3) -> Point3 {
        p - self.signed_distance(p) * self.normal
    }

    /// The plane carried through a rigid transform, basis included.
    pub fn transformed(&self, t: &RigidTransform) -> Plane {
        let normal = t.rotation * self.normal;
        let anchor = t * self.anchor();
        Plane {
            normal,
            offset: -normal.dot(&anchor.coords),
            basis_u: t.rotation * self.basis_u,
            basis_v: t.rotation * self.basis_v,
        }
    }
}

/// Deterministic right-handed basis orthogonal to `n`: seed with the world
/// axis least aligned with the normal.
fn in_plane_basis(n: &Vector3) -> (Vector3, Vector3) {
    let ax = n.x.abs();
    let ay = n.y.abs();
    let az = n.z.abs();
    let seed = if ax <= ay && ax <= az {
        Vector3::x()
    } else if ay <= az {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = seed.cross(n).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// A projected point in plane coordinates, keeping its position in the
/// input slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub u: f64,
    pub v: f64,
    pub index: usize,
}

/// Orthogonally projects every point into the plane's (u, v) chart.
pub fn project_to_plane(plane: &Plane, points: &[Point3]) -> Vec<PlanePoint> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let (u, v) = plane.project_point(p);
            PlanePoint { u, v, index }
        })
        .collect()
}

/// RANSAC parameters for the robust plane-fit stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub iterations: usize,
    pub inlier_dist: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 200,
            inlier_dist: 0.02,
        }
    }
}

/// Fits a plane minimizing the sum of squared orthogonal distances.
///
/// With `ransac` set, a consensus stage selects a majority inlier set
/// first and the total-least-squares refinement runs on the inliers only;
/// fewer than 50% inliers is an error. The returned normal points toward
/// the coordinate origin (the scanner), and the second value is the RMS
/// orthogonal residual over the fitted points.
pub fn fit_plane(
    points: &[Point3],
    ransac: Option<&RansacParams>,
) -> Result<(Plane, f64), GeometryError> {
    match ransac {
        None => tls_fit(points),
        Some(params) => {
            let inliers = ransac_consensus(points, params)?;
            tls_fit(&inliers)
        }
    }
}

fn tls_fit(points: &[Point3]) -> Result<(Plane, f64), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.coords)
        / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p.coords - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let [min_i, mid_i, max_i] = order;
    let lambda_max = eig.eigenvalues[max_i].max(0.0);
    let lambda_mid = eig.eigenvalues[mid_i].max(0.0);
    if lambda_max <= 0.0 || lambda_mid <= RANK_EPS * lambda_max {
        return Err(GeometryError::DegenerateInput(
            "points are collinear or coincident".into(),
        ));
    }

    let mut normal: Vector3 = eig.eigenvectors.column(min_i).into();
    normal.normalize_mut();
    // Orient toward the scanner origin: dot(normal, -centroid) >= 0.
    let toward_origin = normal.dot(&(-centroid));
    if toward_origin < 0.0 {
        normal = -normal;
    } else if toward_origin == 0.0 {
        normal = canonical_sign(normal);
    }
    let offset = -normal.dot(&centroid);
    let plane = Plane::from_normal_offset(normal, offset)?;

    let sq_sum: f64 = points
        .iter()
        .map(|p| {
            let d = plane.signed_distance(p);
            d * d
        })
        .sum();
    Ok((plane, (sq_sum / n).sqrt()))
}

/// Sign convention for the rare case of a plane through the origin: first
/// non-zero component (z, y, x precedence) made positive.
fn canonical_sign(n: Vector3) -> Vector3 {
    for c in [n.z, n.y, n.x] {
        if c > 0.0 {
            return n;
        }
        if c < 0.0 {
            return -n;
        }
    }
    n
}

fn ransac_consensus(
    points: &[Point3],
    params: &RansacParams,
) -> Result<Vec<Point3>, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "plane fit needs at least 3 points".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RANSAC_SEED);
    let n = points.len();
    let mut best: Option<(usize, Vector3, f64)> = None;
    for _ in 0..params.iterations.max(1) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let k = rng.gen_range(0..n);
        if i == j || j == k || i == k {
            continue;
        }
        let ab = points[j] - points[i];
        let ac = points[k] - points[i];
        let cross = ab.cross(&ac);
        let norm = cross.norm();
        if norm < 1e-12 {
            continue;
        }
        let normal = cross / norm;
        let offset = -normal.dot(&points[i].coords);
        let count = points
            .iter()
            .filter(|p| (normal.dot(&p.coords) + offset).abs() <= params.inlier_dist)
            .count();
        if best.as_ref().map_or(true, |(c, _, _)| count > *c) {
            best = Some((count, normal, offset));
        }
    }
    let (count, normal, offset) =
        best.ok_or_else(|| GeometryError::DegenerateInput("all RANSAC samples degenerate".into()))?;
    if count * 2 < n {
        return Err(GeometryError::NoConsensus {
            inliers: count,
            total: n,
        });
    }
    Ok(points
        .iter()
        .filter(|p| (normal.dot(&p.coords) + offset).abs() <= params.inlier_dist)
        .copied()
        .collect())
}
