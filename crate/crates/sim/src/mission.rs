//! Mission scripts: what each vehicle is trying to do and how far along it is.

use usv_core::guidance::{
    azimuth, l1_yaw_rate, legrun_waypoints, trackline_pd, unrep_target, BehaviorDecision, LegRunPath, Path,
    TracklineGains, UnrepGains,
};
use usv_core::vehicle::{wrap_angle, Pose, VehicleState};
use usv_core::Result;

use crate::config::{LineGuidance, MissionConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathGuidance {
    Pd(TracklineGains),
    L1(f64),
}

impl PathGuidance {
    pub fn new(kind: LineGuidance, gains: TracklineGains, l1: f64) -> Self {
        match kind {
            LineGuidance::Pd => PathGuidance::Pd(gains),
            LineGuidance::L1 => PathGuidance::L1(l1),
        }
    }
}

/// Arc-length tracker that only searches near the previous station, so
/// overlapping legs of the same path cannot be confused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationTracker {
    pub station: f64,
    pub behind: f64,
    pub ahead: f64,
}

impl StationTracker {
    pub fn new(behind: f64, ahead: f64) -> Self {
        Self {
            station: 0.0,
            behind,
            ahead,
        }
    }

    /// Projects `p` in the window and returns `(station, signed cross-track)`.
    pub fn update(&mut self, path: &Path, p: (f64, f64)) -> (f64, f64) {
        let proj = path.project_window(p, self.station - self.behind, self.station + self.ahead);
        self.station = proj.station;
        (proj.station, proj.cross_track)
    }
}

#[derive(Debug, Clone)]
pub struct PathMission {
    pub path: Path,
    pub speed: f64,
    pub guidance: PathGuidance,
    /// Station estimated from the navigation solution.
    pub nav_track: StationTracker,
    /// Station of the true position, used for metrics only.
    pub truth_track: StationTracker,
    /// Number of progress events already emitted.
    pub events_fired: usize,
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct UnrepMission {
    pub guide: usize,
    pub offset: (f64, f64),
    pub latency_ticks: u64,
    pub min_separation: f64,
    pub abort_cross_error: Option<f64>,
    pub acquire_time: f64,
    pub gains: UnrepGains,
}

#[derive(Debug, Clone)]
pub enum Mission {
    Path(PathMission),
    Unrep(UnrepMission),
}

impl Mission {
    pub fn new(cfg: &MissionConfig, base_dt: f64) -> Result<Self> {
        Ok(match cfg {
            MissionConfig::Legrun {
                vx1,
                vx2,
                turn_radii,
                first_turn,
                speed,
                guidance,
                gains,
                l1,
            } => {
                let path = legrun_waypoints(&LegRunPath {
                    vx1: (vx1[0], vx1[1]),
                    vx2: (vx2[0], vx2[1]),
                    turn_radii: turn_radii.clone(),
                    first_turn: *first_turn,
                })?;
                Mission::Path(PathMission::new(path, *speed, PathGuidance::new(*guidance, *gains, *l1)))
            }
            MissionConfig::Line {
                start,
                end,
                speed,
                guidance,
                gains,
                l1,
            } => {
                let path = Path::polyline(&[(start[0], start[1]), (end[0], end[1])])?;
                Mission::Path(PathMission::new(path, *speed, PathGuidance::new(*guidance, *gains, *l1)))
            }
            MissionConfig::Unrep {
                guide,
                offset,
                latency,
                min_separation,
                abort_cross_error,
                acquire_time,
                gains,
            } => Mission::Unrep(UnrepMission {
                guide: *guide,
                offset: (offset[0], offset[1]),
                latency_ticks: (latency / base_dt).round() as u64,
                min_separation: *min_separation,
                abort_cross_error: *abort_cross_error,
                acquire_time: *acquire_time,
                gains: *gains,
            }),
        })
    }

    pub fn as_path(&self) -> Option<&PathMission> {
        match self {
            Mission::Path(p) => Some(p),
            Mission::Unrep(_) => None,
        }
    }

    pub fn as_path_mut(&mut self) -> Option<&mut PathMission> {
        match self {
            Mission::Path(p) => Some(p),
            Mission::Unrep(_) => None,
        }
    }
}

impl PathMission {
    pub fn new(path: Path, speed: f64, guidance: PathGuidance) -> Self {
        let look = match guidance {
            PathGuidance::L1(l1) => l1,
            PathGuidance::Pd(_) => 0.0,
        };
        let tracker = StationTracker::new(5.0, 10.0 + 2.0 * look);
        Self {
            path,
            speed,
            guidance,
            nav_track: tracker,
            truth_track: tracker,
            events_fired: 0,
            complete: false,
        }
    }

    /// Updates the navigation station; returns names of newly passed
    /// progress events and marks completion at the path end.
    pub fn advance(&mut self, nav: (f64, f64)) -> Vec<String> {
        let (s, _) = self.nav_track.update(&self.path, nav);
        let mut fired = Vec::new();
        while let Some(e) = self.path.events().get(self.events_fired) {
            if s < e.station {
                break;
            }
            fired.push(e.name.clone());
            self.events_fired += 1;
        }
        if s >= self.path.length() - 0.5 {
            self.complete = true;
        }
        fired
    }

    /// Desired speed and heading from the navigation pose.
    ///
    /// L1 guidance yields a yaw-rate command; it is handed to the helm as the
    /// heading whose filtered steady state reproduces that rate.
    pub fn decide(&self, pose: &Pose, u_sog: f64, tau_theta: f64) -> Result<BehaviorDecision> {
        match self.guidance {
            PathGuidance::Pd(gains) => {
                let seg = self.path.segment_at(self.nav_track.station);
                let (a, b) = match self.path.segments()[seg] {
                    usv_core::guidance::PathSegment::Line { start, end } => (start, end),
                    _ => {
                        let s = self.nav_track.station;
                        (self.path.point_at(s), self.path.point_at(s + 1.0))
                    }
                };
                trackline_pd(pose, u_sog, (a, b), &gains, self.speed)
            }
            PathGuidance::L1(l1) => {
                let eta = self.l1_eta(pose, l1);
                let r_cmd = l1_yaw_rate(u_sog.max(0.1), l1, eta);
                let turn = (r_cmd / tau_theta).clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
                Ok(BehaviorDecision::new(self.speed, wrap_angle(pose.theta + turn)))
            }
        }
    }

    /// Line-of-sight angle to the L1 reference point, searching only ahead
    /// of the current station.
    pub fn l1_eta(&self, pose: &Pose, l1: f64) -> f64 {
        let p = (pose.x, pose.y);
        let s = self.nav_track.station;
        let hits = self.path.circle_intersections_window(p, l1, s, s + 2.0 * l1 + 5.0);
        let target = hits
            .into_iter()
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
            .map(|h| h.0)
            .unwrap_or_else(|| self.path.point_at(s + l1));
        if (target.0 - p.0).hypot(target.1 - p.1) < 1e-9 {
            return 0.0;
        }
        wrap_angle(azimuth(p, target) - pose.theta)
    }
}

impl UnrepMission {
    /// Station-keeping decision and `(inline, cross)` errors against the
    /// shared guide state.
    pub fn decide(&self, guide: &VehicleState, own: &Pose, own_speed: f64) -> (BehaviorDecision, (f64, f64)) {
        unrep_target(guide, self.offset, own, own_speed, &self.gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use usv_core::guidance::TurnDirection;

    fn legrun() -> PathMission {
        let path = legrun_waypoints(&LegRunPath {
            vx1: (0.0, 0.0),
            vx2: (30.0, 0.0),
            turn_radii: vec![20.0, 20.0, 10.0, 10.0],
            first_turn: TurnDirection::Starboard,
        })
        .unwrap();
        PathMission::new(path, 1.5, PathGuidance::L1(5.0))
    }

    #[test]
    fn tracker_walks_the_whole_legrun_once() {
        let mut m = legrun();
        let len = m.path.length();
        let mut names = Vec::new();
        let mut s = 0.0;
        while s <= len {
            names.extend(m.advance(m.path.point_at(s)));
            s += 0.5;
        }
        names.extend(m.advance(m.path.point_at(len)));
        assert_eq!(
            names,
            ["turn-1-complete", "turn-2-complete", "turn-3-complete", "turn-4-complete"]
        );
        assert!(m.complete);
    }

    #[test]
    fn station_does_not_jump_to_an_overlapping_leg() {
        let mut m = legrun();
        // Second leg runs back over the first; a global projection would
        // snap to whichever leg is nearer.
        let target = m.path.segment_start(3) + 20.0;
        let mut s = 0.0;
        while s < target {
            m.advance(m.path.point_at(s));
            s += 0.5;
        }
        assert!((m.nav_track.station - (s - 0.5)).abs() < 1e-6);
    }

    #[test]
    fn l1_on_the_path_points_straight_ahead() {
        let mut m = legrun();
        m.advance((10.0, 0.0));
        let eta = m.l1_eta(&Pose::new(10.0, 0.0, 0.0), 5.0);
        assert!(eta.abs() < 1e-12);
    }

    #[test]
    fn l1_steers_back_from_an_offset() {
        let mut m = legrun();
        m.advance((10.0, -3.0));
        let eta = m.l1_eta(&Pose::new(10.0, -3.0, 0.0), 5.0);
        // path lies to starboard (east), so turn right; sin(eta) = 3/5
        assert!((eta.sin() - 0.6).abs() < 1e-9);
        let d = m.decide(&Pose::new(10.0, -3.0, 0.0), 1.5, 0.2).unwrap();
        assert!(d.theta_des > 0.0);
    }

    #[test]
    fn pd_line_uses_trackline_law() {
        let path = Path::polyline(&[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        let mut m = PathMission::new(path, 1.0, PathGuidance::Pd(TracklineGains::default()));
        m.advance((20.0, 2.0));
        let d = m.decide(&Pose::new(20.0, 2.0, 0.0), 1.0, 0.2).unwrap();
        assert!(d.theta_des < 0.0);
        assert_eq!(d.u_des, 1.0);
    }
}
