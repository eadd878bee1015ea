//! Temporary calibration probe (not part of the suite).

use std::time::Instant;

use gcpbench_core::detector::{detect_gcp, evaluate_detector_grid, DetectorConfig};
use gcpbench_core::geometry::{Plane, Point3, Vector3};
use gcpbench_core::sim::{simulate_scan, FiducialSpec, ScannerSpec};

fn ground() -> Plane {
    Plane::from_normal_offset(Vector3::z(), 0.0).unwrap()
}

fn survey_grid() -> Vec<Point3> {
    let mut grid = Vec::with_capacity(36);
    for i in 0..6 {
        for j in 0..6 {
            grid.push(Point3::new(
                0.475 + 0.05 * i as f64,
                -0.125 + 0.05 * j as f64,
                0.0,
            ));
        }
    }
    grid
}

#[test]
#[ignore]
fn probe_noisy_grid() {
    let scanner = ScannerSpec {
        range_noise_sigma: 0.03,
        intensity_noise_sigma: 0.05,
        azimuth_phase_jitter: true,
        ..ScannerSpec::default()
    };
    for blur in [2.0, 4.0, 6.0, 8.0] {
        let mut all = Vec::new();
        let mut fails = 0;
        let mut sim_s = 0.0;
        let mut det_s = 0.0;
        for seed in 0..3u64 {
            let grid = survey_grid();
            let mut detections = Vec::new();
            for (idx, &center) in grid.iter().enumerate() {
                let fiducial = FiducialSpec {
                    center,
                    ..FiducialSpec::default()
                };
                let t0 = Instant::now();
                let scans = simulate_scan(
                    &scanner,
                    &ground(),
                    &fiducial,
                    10,
                    1_000 + seed * 100 + idx as u64,
                )
                .unwrap();
                sim_s += t0.elapsed().as_secs_f64();
                let cfg = DetectorConfig {
                    roi_center_hint: Some((center.x, center.y)),
                    blur_sigma: blur,
                    ..DetectorConfig::default()
                };
                let t0 = Instant::now();
                match detect_gcp(&scans, &cfg) {
                    Ok(d) => detections.push(d.center),
                    Err(e) => {
                        fails += 1;
                        eprintln!("seed {seed} pos {idx}: {e}");
                        detections.push(Point3::origin());
                    }
                }
                det_s += t0.elapsed().as_secs_f64();
            }
            if fails == 0 {
                let stats = evaluate_detector_grid(&grid, &detections).unwrap();
                all.extend(stats.errors);
            }
        }
        all.sort_by(f64::total_cmp);
        let n = all.len();
        if n > 0 {
            println!(
                "blur {blur}: n {n} fails {fails} | med {:.2} p90 {:.2} p99 {:.2} max {:.2} mm | sim {sim_s:.1}s det {det_s:.1}s",
                1e3 * all[n / 2],
                1e3 * all[n * 9 / 10],
                1e3 * all[n * 99 / 100],
                1e3 * all[n - 1]
            );
        } else {
            println!("blur {blur}: all seeds had failures ({fails})");
        }
    }
}
