//! Piecewise line/arc paths and the LegRun mission geometry.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use super::azimuth;
use super::trackline::cross_track;
use crate::error::{Error, Result};
use crate::vehicle::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnDirection {
    Starboard,
    Port,
}

impl TurnDirection {
    /// `+1` for clockwise (starboard) turns.
    pub fn sign(&self) -> f64 {
        match self {
            TurnDirection::Starboard => 1.0,
            TurnDirection::Port => -1.0,
        }
    }

    pub fn flip(&self) -> Self {
        match self {
            TurnDirection::Starboard => TurnDirection::Port,
            TurnDirection::Port => TurnDirection::Starboard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathSegment {
    Line {
        start: (f64, f64),
        end: (f64, f64),
    },
    Arc {
        center: (f64, f64),
        radius: f64,
        /// Heading of travel at the arc start.
        start_heading: f64,
        /// Swept heading magnitude, radians.
        sweep: f64,
        dir: TurnDirection,
    },
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        match *self {
            PathSegment::Line { start, end } => (end.0 - start.0).hypot(end.1 - start.1),
            PathSegment::Arc { radius, sweep, .. } => radius * sweep,
        }
    }

    /// Position and heading of travel at local arc length `s`.
    pub fn at(&self, s: f64) -> ((f64, f64), f64) {
        match *self {
            PathSegment::Line { start, end } => {
                let l = self.length();
                let t = (s / l).clamp(0.0, 1.0);
                (
                    (start.0 + t * (end.0 - start.0), start.1 + t * (end.1 - start.1)),
                    azimuth(start, end),
                )
            }
            PathSegment::Arc {
                center,
                radius,
                start_heading,
                dir,
                sweep,
            } => {
                let d = dir.sign();
                let psi = start_heading + d * (s.clamp(0.0, radius * sweep) / radius);
                let p = (center.0 + d * radius * psi.sin(), center.1 - d * radius * psi.cos());
                (p, wrap_angle(psi))
            }
        }
    }

    /// Signed curvature, positive for starboard turns.
    pub fn curvature(&self) -> f64 {
        match *self {
            PathSegment::Line { .. } => 0.0,
            PathSegment::Arc { radius, dir, .. } => dir.sign() / radius,
        }
    }

    /// Closest local arc length and signed cross-track (positive to starboard).
    fn project(&self, p: (f64, f64)) -> (f64, f64) {
        match *self {
            PathSegment::Line { start, end } => {
                let l = self.length();
                let az = azimuth(start, end);
                let along = (p.0 - start.0) * az.cos() + (p.1 - start.1) * az.sin();
                (along.clamp(0.0, l), cross_track(p.0, p.1, start, az))
            }
            PathSegment::Arc {
                center,
                radius,
                start_heading,
                sweep,
                dir,
            } => {
                let d = dir.sign();
                let (ux, uy) = (p.0 - center.0, p.1 - center.1);
                let dist = ux.hypot(uy);
                let cross = d * (radius - dist);
                if dist < 1e-12 {
                    return (0.0, cross);
                }
                let psi = (d * ux).atan2(-d * uy);
                let phi = (d * (psi - start_heading)).rem_euclid(2.0 * PI);
                let local = if phi <= sweep {
                    phi * radius
                } else if phi - sweep < 2.0 * PI - phi {
                    sweep * radius
                } else {
                    0.0
                };
                (local, cross)
            }
        }
    }

    /// Intersections with the circle of radius `r` about `p`, as local arc lengths.
    fn circle_hits(&self, p: (f64, f64), r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match *self {
            PathSegment::Line { start, end } => {
                let l = self.length();
                let (dx, dy) = ((end.0 - start.0) / l, (end.1 - start.1) / l);
                let (fx, fy) = (start.0 - p.0, start.1 - p.1);
                let b = fx * dx + fy * dy;
                let c = fx * fx + fy * fy - r * r;
                let disc = b * b - c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [-b - sq, -b + sq] {
                        if (0.0..=l).contains(&t) {
                            out.push(t);
                        }
                    }
                }
            }
            PathSegment::Arc {
                center, radius, ..
            } => {
                let (dx, dy) = (p.0 - center.0, p.1 - center.1);
                let d = dx.hypot(dy);
                if d < 1e-12 || d > radius + r || d < (radius - r).abs() {
                    return out;
                }
                let a = (radius * radius - r * r + d * d) / (2.0 * d);
                let h = (radius * radius - a * a).max(0.0).sqrt();
                let (mx, my) = (center.0 + a * dx / d, center.1 + a * dy / d);
                for sgn in [-1.0, 1.0] {
                    let q = (mx + sgn * h * dy / d, my - sgn * h * dx / d);
                    let (s, cross) = self.project(q);
                    let (on, _) = self.at(s);
                    if cross.abs() < 1e-9 && (on.0 - q.0).hypot(on.1 - q.1) < 1e-6 {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathProjection {
    pub station: f64,
    pub point: (f64, f64),
    /// Signed cross-track, positive to starboard of the direction of travel.
    pub cross_track: f64,
    pub tangent: f64,
    pub curvature: f64,
    pub segment: usize,
}

/// Named point along a path, used to trigger scheduled disturbances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub station: f64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    segments: Vec<PathSegment>,
    starts: Vec<f64>,
    length: f64,
    events: Vec<ProgressEvent>,
    /// Segment index ranges that belong to turns, for mode reporting.
    turns: Vec<(usize, usize)>,
}

impl Path {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::DegenerateGeometry("empty path".into()));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut length = 0.0;
        for seg in &segments {
            let l = seg.length();
            if !(l > 1e-9) || !l.is_finite() {
                return Err(Error::DegenerateGeometry("zero-length path segment".into()));
            }
            starts.push(length);
            length += l;
        }
        Ok(Self {
            segments,
            starts,
            length,
            events: Vec::new(),
            turns: Vec::new(),
        })
    }

    pub fn polyline(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateGeometry("polyline needs two points".into()));
        }
        Self::new(
            points
                .windows(2)
                .map(|w| PathSegment::Line { start: w[0], end: w[1] })
                .collect(),
        )
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn events(&self) -> &[ProgressEvent] {
        &self.events
    }

    pub fn segment_start(&self, i: usize) -> f64 {
        self.starts[i]
    }

    pub fn segment_at(&self, s: f64) -> usize {
        match self.starts.iter().rposition(|&st| st <= s) {
            Some(i) => i,
            None => 0,
        }
    }

    /// Whether the segment at `s` is part of a turn.
    pub fn in_turn(&self, s: f64) -> Option<usize> {
        let i = self.segment_at(s);
        self.turns.iter().position(|&(a, b)| (a..=b).contains(&i))
    }

    pub fn point_at(&self, s: f64) -> (f64, f64) {
        self.pose_at(s).0
    }

    pub fn pose_at(&self, s: f64) -> ((f64, f64), f64) {
        let s = s.clamp(0.0, self.length);
        let i = self.segment_at(s);
        self.segments[i].at(s - self.starts[i])
    }

    fn projection_on(&self, i: usize, p: (f64, f64), lo: f64, hi: f64) -> PathProjection {
        let seg = &self.segments[i];
        let start = self.starts[i];
        let (mut local, mut cross) = seg.project(p);
        let clamped = (start + local).clamp(lo, hi) - start;
        if clamped != local {
            local = clamped;
            let (q, h) = seg.at(local);
            cross = cross_track(p.0, p.1, q, h);
        }
        let (point, tangent) = seg.at(local);
        PathProjection {
            station: start + local,
            point,
            cross_track: cross,
            tangent,
            curvature: seg.curvature(),
            segment: i,
        }
    }

    /// Closest path point over the whole path.
    pub fn project(&self, p: (f64, f64)) -> PathProjection {
        self.project_window(p, 0.0, self.length)
    }

    /// Closest path point with station restricted to `[lo, hi]`.
    pub fn project_window(&self, p: (f64, f64), lo: f64, hi: f64) -> PathProjection {
        let lo = lo.clamp(0.0, self.length);
        let hi = hi.clamp(lo, self.length);
        let mut best: Option<(f64, PathProjection)> = None;
        for i in 0..self.segments.len() {
            let a = self.starts[i];
            let b = a + self.segments[i].length();
            if b < lo || a > hi {
                continue;
            }
            let proj = self.projection_on(i, p, lo, hi);
            let d = (proj.point.0 - p.0).hypot(proj.point.1 - p.1);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-12) {
                best = Some((d, proj));
            }
        }
        best.map(|(_, p)| p).expect("window overlaps the path")
    }

    /// All intersections of the circle `(p, r)` with the path, with station.
    pub fn circle_intersections(&self, p: (f64, f64), r: f64) -> Vec<((f64, f64), f64)> {
        self.circle_intersections_window(p, r, 0.0, self.length)
    }

    pub fn circle_intersections_window(
        &self,
        p: (f64, f64),
        r: f64,
        lo: f64,
        hi: f64,
    ) -> Vec<((f64, f64), f64)> {
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            for local in seg.circle_hits(p, r) {
                let s = self.starts[i] + local;
                if s >= lo && s <= hi {
                    out.push((seg.at(local).0, s));
                }
            }
        }
        out
    }
}

/// Parameters of a LegRun: straight legs between two vertices joined by
/// Williamson turns of the scheduled radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRunPath {
    pub vx1: (f64, f64),
    pub vx2: (f64, f64),
    pub turn_radii: Vec<f64>,
    #[serde(default = "starboard")]
    pub first_turn: TurnDirection,
}

fn starboard() -> TurnDirection {
    TurnDirection::Starboard
}

impl Default for LegRunPath {
    fn default() -> Self {
        Self {
            vx1: (0.0, 0.0),
            vx2: (30.0, 0.0),
            turn_radii: vec![20.0, 20.0, 10.0, 10.0],
            first_turn: TurnDirection::Starboard,
        }
    }
}

fn arc_from(p: (f64, f64), heading: f64, radius: f64, sweep: f64, dir: TurnDirection) -> PathSegment {
    let d = dir.sign();
    PathSegment::Arc {
        center: (p.0 - d * radius * heading.sin(), p.1 + d * radius * heading.cos()),
        radius,
        start_heading: heading,
        sweep,
        dir,
    }
}

/// Builds the LegRun path.
///
/// Each Williamson turn leaves the track with a quarter circle and returns
/// with a three-quarter circle the other way, landing on the extended
/// trackline two radii beyond the vertex with the heading reversed. Turn
/// directions alternate starting with `first_turn`. Emits `turn-k-complete`
/// events (1-based) at the end of each turn.
pub fn legrun_waypoints(cfg: &LegRunPath) -> Result<Path> {
    let d = (cfg.vx2.0 - cfg.vx1.0).hypot(cfg.vx2.1 - cfg.vx1.1);
    if d < 1e-6 {
        return Err(Error::DegenerateGeometry("LegRun vertices coincide".into()));
    }
    if cfg.turn_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::DegenerateGeometry("turn radii must be positive".into()));
    }
    let mut segments = vec![PathSegment::Line {
        start: cfg.vx1,
        end: cfg.vx2,
    }];
    let mut turns = Vec::new();
    let mut heading = azimuth(cfg.vx1, cfg.vx2);
    let mut at = cfg.vx2;
    let mut dir = cfg.first_turn;
    let mut targets = [cfg.vx1, cfg.vx2].into_iter().cycle();
    let mut turn_ends = Vec::new();
    for &radius in &cfg.turn_radii {
        let first = segments.len();
        let out = arc_from(at, heading, radius, FRAC_PI_2, dir);
        let (p1, h1) = out.at(out.length());
        let back = arc_from(p1, h1, radius, 1.5 * PI, dir.flip());
        let (p2, h2) = back.at(back.length());
        segments.push(out);
        segments.push(back);
        turns.push((first, first + 1));
        turn_ends.push(segments.len());
        let target = targets.next().expect("cycle");
        segments.push(PathSegment::Line { start: p2, end: target });
        at = target;
        heading = h2;
        dir = dir.flip();
    }
    let mut path = Path::new(segments)?;
    path.turns = turns;
    path.events = turn_ends
        .iter()
        .enumerate()
        .map(|(k, &seg)| ProgressEvent {
            station: path.starts[seg],
            name: format!("turn-{}-complete", k + 1),
        })
        .collect();
    Ok(path)
}
