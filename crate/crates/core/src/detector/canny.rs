//! 1D Canny edge detection on per-ring intensity signals.
//!
//! Stages: Gaussian smoothing, central-difference gradient, non-maximum
//! suppression, hysteresis with thresholds relative to the ring's max
//! gradient magnitude, then sub-sample refinement by parabolic fit.
//! Relative thresholds make the detector invariant to positive scaling of
//! the intensity channel.

use crate::geometry::Plane;
use crate::sim::Ring;

use super::DetectorConfig;

/// An intensity edge mapped into the plane chart, with its source ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub u: f64,
    pub v: f64,
    /// Fractional sample index along the ring.
    pub sub_sample: f64,
    pub scan: usize,
    pub ring: usize,
}

/// Signals with a max gradient below this are considered flat.
const FLAT_EPS: f64 = 1e-12;

/// Runs the 1D Canny detector on one ring and maps accepted edges to
/// in-plane (u, v) by linear interpolation between the projected samples
/// neighboring the sub-sample edge position.
pub fn detect_edges(ring: &Ring, plane: &Plane, cfg: &DetectorConfig) -> Vec<EdgePoint> {
    if ring.samples.len() < 5 {
        return Vec::new();
    }
    let intensities: Vec<f64> = ring.samples.iter().map(|s| s.intensity).collect();
    let positions = canny_1d(
        &intensities,
        cfg.canny_smooth_sigma,
        cfg.canny_high_frac,
        cfg.canny_low_frac,
    );
    let uv: Vec<(f64, f64)> = ring
        .samples
        .iter()
        .map(|s| plane.project_point(&s.point))
        .collect();
    positions
        .into_iter()
        .map(|pos| {
            let lo = (pos.floor().max(0.0) as usize).min(uv.len() - 2);
            let frac = (pos - lo as f64).clamp(0.0, 1.0);
            let (u0, v0) = uv[lo];
            let (u1, v1) = uv[lo + 1];
            EdgePoint {
                u: u0 + frac * (u1 - u0),
                v: v0 + frac * (v1 - v0),
                sub_sample: pos,
                scan: 0,
                ring: ring.ring_index,
            }
        })
        .collect()
}

/// Core 1D Canny: returns sub-sample edge positions (fractional indices).
pub(crate) fn canny_1d(
    signal: &[f64],
    smooth_sigma: f64,
    high_frac: f64,
    low_frac: f64,
) -> Vec<f64> {
    let n = signal.len();
    if n < 5 {
        return Vec::new();
    }
    let smoothed = smooth(signal, smooth_sigma);

    // Central-difference gradient; one-sided at the ends.
    let mut grad = vec![0.0; n];
    grad[0] = smoothed[1] - smoothed[0];
    grad[n - 1] = smoothed[n - 1] - smoothed[n - 2];
    for i in 1..n - 1 {
        grad[i] = 0.5 * (smoothed[i + 1] - smoothed[i - 1]);
    }
    let mag: Vec<f64> = grad.iter().map(|g| g.abs()).collect();
    let max_mag = mag.iter().cloned().fold(0.0f64, f64::max);
    if max_mag < FLAT_EPS {
        return Vec::new();
    }
    let high = high_frac * max_mag;
    let low = low_frac * max_mag;

    // Non-maximum suppression over the magnitude chain.
    let peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| mag[i] >= mag[i - 1] && mag[i] > mag[i + 1] && mag[i] >= low)
        .collect();

    // Hysteresis: a peak survives if its low-threshold run contains any
    // sample reaching the high threshold.
    let mut run_has_high = vec![false; n];
    let mut i = 0;
    while i < n {
        if mag[i] >= low {
            let start = i;
            let mut any_high = false;
            while i < n && mag[i] >= low {
                any_high |= mag[i] >= high;
                i += 1;
            }
            if any_high {
                for flag in &mut run_has_high[start..i] {
                    *flag = true;
                }
            }
        } else {
            i += 1;
        }
    }

    peaks
        .into_iter()
        .filter(|&p| run_has_high[p])
        .map(|p| p as f64 + parabolic_offset(mag[p - 1], mag[p], mag[p + 1]))
        .collect()
}

/// Sub-sample peak offset from a parabola through three magnitudes,
/// clamped to half a sample.
fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = left - 2.0 * center + right;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

fn smooth(signal: &[f64], sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return signal.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let n = signal.len() as i64;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                let idx = reflect_index(i + j as i64 - radius, n);
                acc += w * signal[idx];
            }
            acc / norm
        })
        .collect()
}

/// Symmetric (edge-including) reflection of an index into [0, n).
pub(crate) fn reflect_index(mut i: i64, n: i64) -> usize {
    debug_assert!(n > 0);
    loop {
        if i < 0 {
            i = -1 - i;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}
