use serde::{Deserialize, Serialize};

use super::rect::HyperRect;
use crate::error::{Error, Result};

/// Convex polygon in the (x, y) plane, vertices in either winding order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateGeometry(format!("polygon needs 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polygon vertex"));
        }
        let mut sign = 0.0;
        let mut area2 = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            area2 += a[0] * b[1] - b[0] * a[1];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross.abs() <= 1e-12 {
                return Err(Error::DegenerateGeometry("collinear or repeated polygon vertices".into()));
            }
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return Err(Error::DegenerateGeometry("polygon is not convex".into()));
            }
        }
        // A self-intersecting star passes the turn test but winds twice.
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let h1 = (b[1] - a[1]).atan2(b[0] - a[0]);
            let h2 = (c[1] - b[1]).atan2(c[0] - b[0]);
            turning += crate::vehicle::wrap_angle(h2 - h1);
        }
        if (turning.abs() - std::f64::consts::TAU).abs() > 1e-6 || area2.abs() <= 1e-12 {
            return Err(Error::DegenerateGeometry("polygon is not simple".into()));
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        let mut sign = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            if cross == 0.0 {
                continue;
            }
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return false;
            }
        }
        true
    }

    /// Closed box/polygon overlap via the separating axis theorem.
    pub fn intersects_box(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        let (pmin, pmax) = self.vertices.iter().fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(mn, mx), v| ([mn[0].min(v[0]), mn[1].min(v[1])], [mx[0].max(v[0]), mx[1].max(v[1])]),
        );
        if pmax[0] < lo[0] || pmin[0] > hi[0] || pmax[1] < lo[1] || pmin[1] > hi[1] {
            return false;
        }
        let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let axis = [b[1] - a[1], a[0] - b[0]];
            let proj = |p: &[f64; 2]| axis[0] * p[0] + axis[1] * p[1];
            let (amin, amax) = self
                .vertices
                .iter()
                .map(proj)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let (bmin, bmax) = corners
                .iter()
                .map(proj)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            if amax < bmin || bmax < amin {
                return false;
            }
        }
        true
    }
}

impl TryFrom<Vec<[f64; 2]>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConvexPolygon> for Vec<[f64; 2]> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

/// Union of convex polygons, optionally with surge-speed and heading limits
/// whose violation also counts as unsafe.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnsafeRegion {
    #[serde(default)]
    pub polygons: Vec<ConvexPolygon>,
    /// Safe surge-speed band (m/s); leaving it is unsafe.
    #[serde(default)]
    pub speed_bounds: Option<(f64, f64)>,
    /// Safe heading band (rad, unwrapped).
    #[serde(default)]
    pub heading_bounds: Option<(f64, f64)>,
}

impl UnsafeRegion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_polygons(polygons: Vec<ConvexPolygon>) -> Self {
        Self {
            polygons,
            ..Self::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty() && self.speed_bounds.is_none() && self.heading_bounds.is_none()
    }
}

/// Whether the state box (x, y, theta, u, ...) touches the unsafe region.
/// Only the first two components are needed unless extra bounds are set.
pub fn rect_intersects_region(rect: &HyperRect, region: &UnsafeRegion) -> Result<bool> {
    if rect.dim() < 2 {
        return Err(Error::InvalidArgument("rect must have at least (x, y)".into()));
    }
    let lo = [rect.lo(0), rect.lo(1)];
    let hi = [rect.hi(0), rect.hi(1)];
    if region.polygons.iter().any(|p| p.intersects_box(lo, hi)) {
        return Ok(true);
    }
    let leaves = |i: usize, (a, b): (f64, f64)| -> Result<bool> {
        if rect.dim() <= i {
            return Err(Error::InvalidArgument(format!("rect has no component {i}")));
        }
        Ok(rect.lo(i) < a || rect.hi(i) > b)
    };
    if let Some(band) = region.heading_bounds {
        if leaves(2, band)? {
            return Ok(true);
        }
    }
    if let Some(band) = region.speed_bounds {
        if leaves(3, band)? {
            return Ok(true);
        }
    }
    Ok(false)
}
