//! Ground-control-point (GCP) benchmark toolkit for LiDAR SLAM evaluation.
//!
//! The crate has two halves that meet at a shared geometry core:
//!
//! * **Detection** — a synthetic hemispherical multi-ring scanner
//!   ([`sim`]) produces intensity-annotated scans of a circular floor
//!   fiducial, and [`detector`] recovers the fiducial center from them by
//!   plane fitting, per-ring 1D Canny edge detection, and circular Hough
//!   voting.
//! * **Benchmarking** — [`eval`] scores submitted trajectories against
//!   surveyed GCPs (bracketed per-point scores, normalized sequence
//!   scores, sparse RMSE ATE, Rayleigh error statistics), and
//!   [`validation`] runs submission integrity checks (format
//!   diagnostics, discontinuity detection, progressive-submission
//!   diffing).
//!
//! [`formats`] holds the text/CSV/JSON wire formats shared by the CLI and
//! the evaluation server side of the pipeline. All operations are pure
//! functions over immutable inputs and safe to call concurrently.

pub mod detector;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod sim;
pub mod validation;
