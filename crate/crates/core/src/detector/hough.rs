//! Circular Hough voting over candidate fiducial centers.
//!
//! Every (edge, radius) pair deposits one unit of weight spread uniformly
//! over the accumulator cells its circle crosses, so total accumulator
//! weight equals the number of in-grid circle hypotheses (minus the
//! out-of-grid fraction). Votes are merged additively, which makes
//! per-scan partial accumulators combinable in any order.

use super::canny::{reflect_index, EdgePoint};

/// 2D vote grid over in-plane candidate centers.
///
/// The grid is square with an odd number of cells per side, centered on
/// `center`; cell (0, 0) is the lowest (u, v) corner.
#[derive(Debug, Clone, PartialEq)]
pub struct HoughAccumulator {
    center: (f64, f64),
    cell_size: f64,
    half_cells: i64,
    weights: Vec<f64>,
}

impl HoughAccumulator {
    /// Grid centered at `center` covering ±`half_extent` with square cells.
    pub fn new(center: (f64, f64), half_extent: f64, cell_size: f64) -> Self {
        assert!(cell_size > 0.0 && half_extent > 0.0);
        let half_cells = (half_extent / cell_size).ceil() as i64;
        let side = (2 * half_cells + 1) as usize;
        Self {
            center,
            cell_size,
            half_cells,
            weights: vec![0.0; side * side],
        }
    }

    pub fn side(&self) -> usize {
        (2 * self.half_cells + 1) as usize
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Grid indices of the cell containing `(u, v)`; may be out of bounds.
    pub fn cell_of(&self, u: f64, v: f64) -> (i64, i64) {
        (
            ((u - self.center.0) / self.cell_size).round() as i64 + self.half_cells,
            ((v - self.center.1) / self.cell_size).round() as i64 + self.half_cells,
        )
    }

    /// In-plane coordinates of a cell center.
    pub fn cell_center(&self, ix: i64, iy: i64) -> (f64, f64) {
        (
            self.center.0 + (ix - self.half_cells) as f64 * self.cell_size,
            self.center.1 + (iy - self.half_cells) as f64 * self.cell_size,
        )
    }

    fn flat(&self, ix: i64, iy: i64) -> Option<usize> {
        let side = 2 * self.half_cells + 1;
        if ix < 0 || iy < 0 || ix >= side || iy >= side {
            None
        } else {
            Some((iy * side + ix) as usize)
        }
    }

    pub fn weight_at(&self, ix: i64, iy: i64) -> f64 {
        self.flat(ix, iy).map_or(0.0, |i| self.weights[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Merges another accumulator of identical layout (associative and
    /// commutative, so partial accumulators can combine in any order).
    pub fn merge(&mut self, other: &HoughAccumulator) {
        assert_eq!(self.center, other.center);
        assert_eq!(self.cell_size, other.cell_size);
        assert_eq!(self.half_cells, other.half_cells);
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
    }

    /// Highest-weight cell; ties resolve to the lowest (row, column).
    pub fn argmax(&self) -> (i64, i64, f64) {
        let side = 2 * self.half_cells + 1;
        let mut best = (0i64, 0i64, f64::NEG_INFINITY);
        for iy in 0..side {
            for ix in 0..side {
                let w = self.weights[(iy * side + ix) as usize];
                if w > best.2 {
                    best = (ix, iy, w);
                }
            }
        }
        best
    }

    /// Gaussian blur with a normalized kernel and reflected borders;
    /// preserves total weight.
    pub fn blurred(&self, sigma_cells: f64) -> HoughAccumulator {
        if sigma_cells <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma_cells).ceil() as i64;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|k| (-0.5 * (k as f64 / sigma_cells).powi(2)).exp())
            .collect();
        let norm: f64 = kernel.iter().sum();
        let kernel: Vec<f64> = kernel.into_iter().map(|w| w / norm).collect();

        let side = 2 * self.half_cells + 1;
        let n = side as usize;
        let mut tmp = vec![0.0; n * n];
        // Horizontal pass.
        for iy in 0..n {
            for ix in 0..n {
                let mut acc = 0.0;
                for (j, w) in kernel.iter().enumerate() {
                    let sx = reflect_index(ix as i64 + j as i64 - radius, side);
                    acc += w * self.weights[iy * n + sx];
                }
                tmp[iy * n + ix] = acc;
            }
        }
        // Vertical pass.
        let mut out = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let mut acc = 0.0;
                for (j, w) in kernel.iter().enumerate() {
                    let sy = reflect_index(iy as i64 + j as i64 - radius, side);
                    acc += w * tmp[sy * n + ix];
                }
                out[iy * n + ix] = acc;
            }
        }
        HoughAccumulator {
            weights: out,
            ..self.clone()
        }
    }

    /// CSV matrix dump (rows = v cells, columns = u cells).
    pub fn to_csv(&self) -> String {
        let side = self.side();
        let mut out = String::new();
        for iy in 0..side {
            let row: Vec<String> = (0..side)
                .map(|ix| self.weights[iy * side + ix].to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Deposits circle votes for every (edge, radius) pair.
///
/// Each circle is rasterized at arc steps of half a cell, duplicate cells
/// are deduplicated per circle, and the unit weight is spread over all
/// distinct cells (in-grid or not); out-of-grid cells drop their share.
pub fn hough_vote(acc: &mut HoughAccumulator, edges: &[EdgePoint], radii: &[f64]) {
    let mut cells: Vec<(i64, i64)> = Vec::new();
    for edge in edges {
        for &radius in radii {
            cells.clear();
            let steps = ((std::f64::consts::TAU * radius) / (acc.cell_size() * 0.5))
                .ceil()
                .max(8.0) as usize;
            for k in 0..steps {
                let theta = std::f64::consts::TAU * k as f64 / steps as f64;
                let (s, c) = theta.sin_cos();
                cells.push(acc.cell_of(edge.u + radius * c, edge.v + radius * s));
            }
            cells.sort_unstable();
            cells.dedup();
            let share = 1.0 / cells.len() as f64;
            for &(ix, iy) in cells.iter() {
                if let Some(i) = acc.flat(ix, iy) {
                    acc.weights[i] += share;
                }
            }
        }
    }
}
