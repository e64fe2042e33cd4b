use super::path::Path;
use super::azimuth;
use crate::vehicle::{wrap_angle, Pose};

/// Lateral yaw-rate command `2 u sin(eta) / L1`.
pub fn l1_yaw_rate(u_sog: f64, l1: f64, eta: f64) -> f64 {
    2.0 * u_sog * eta.sin() / l1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Point {
    pub point: (f64, f64),
    /// Arc length of the reference point along the path.
    pub station: f64,
    /// Angle from the ownship course to the line of sight, positive clockwise.
    pub eta: f64,
    /// Whether the point came from the nearest-point fallback.
    pub fallback: bool,
}

/// Reference point at distance `l1` from the ownship on `path`.
///
/// Among all intersections of the L1 circle with the path the one furthest
/// along the path wins. Without an intersection the nearest path point is used.
pub fn l1_reference_point(pose: &Pose, path: &Path, l1: f64) -> L1Point {
    let p = (pose.x, pose.y);
    let (point, station, fallback) = match path.circle_intersections(p, l1).into_iter().reduce(|a, b| if b.1 > a.1 { b } else { a }) {
        Some((pt, s)) => (pt, s, false),
        None => {
            let proj = path.project(p);
            (proj.point, proj.station, true)
        }
    };
    let eta = if (point.0 - p.0).hypot(point.1 - p.1) < 1e-12 {
        0.0
    } else {
        wrap_angle(azimuth(p, point) - pose.theta)
    };
    L1Point {
        point,
        station,
        eta,
        fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn yaw_rate_examples() {
        assert_abs_diff_eq!(l1_yaw_rate(1.0, 10.0, PI / 6.0), 0.1, epsilon = 1e-12);
        assert_eq!(l1_yaw_rate(1.0, 10.0, 0.0), 0.0);
        assert!(l1_yaw_rate(1.0, 10.0, -0.3) < 0.0);
        assert_abs_diff_eq!(l1_yaw_rate(2.0, 10.0, 0.3), 2.0 * l1_yaw_rate(1.0, 10.0, 0.3), epsilon = 1e-15);
    }

    #[test]
    fn on_path_heading_along() {
        let path = Path::polyline(&[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        let r = l1_reference_point(&Pose::new(10.0, 0.0, 0.0), &path, 5.0);
        assert_abs_diff_eq!(r.eta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.point.0, 15.0, epsilon = 1e-12);
        assert!(!r.fallback);
    }

    #[test]
    fn offset_left_gives_right_triangle() {
        let path = Path::polyline(&[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        // Port of a northbound line is west (negative y).
        let r = l1_reference_point(&Pose::new(10.0, -3.0, 0.0), &path, 5.0);
        assert_abs_diff_eq!(r.eta.sin(), 3.0 / 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.point.0, 14.0, epsilon = 1e-12);
    }

    #[test]
    fn far_from_path_falls_back() {
        let path = Path::polyline(&[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        let r = l1_reference_point(&Pose::new(50.0, 30.0, 0.0), &path, 5.0);
        assert!(r.fallback);
        assert!(r.eta.is_finite());
        assert_abs_diff_eq!(r.point.0, 50.0, epsilon = 1e-12);
    }
}
