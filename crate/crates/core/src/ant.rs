//! Area estimation from random segment intersections.
//!
//! Two independent sets of segments with total lengths `S` and `L` scattered
//! uniformly over a region of area `A` intersect `2SL/(pi A)` times on average,
//! so `2SL/(pi N)` estimates the area from an observed count `N`.
//!
//! The region is a square torus, which has no boundary and makes the
//! expectation exact. Segments are at most half the side long, so for any pair
//! only the minimal-image copy of one segment can reach the other.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::streams::UnitSource;

/// Tolerance for orientation and bounding-box tests, relative to the side
/// (lengths) or side squared (cross products). Touching and collinear
/// contacts within it count as intersections.
const CONTACT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusRegion {
    side: f64,
}

impl TorusRegion {
    pub fn new(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidConfiguration(format!(
                "torus side must be positive and finite, got {side}"
            )));
        }
        Ok(Self { side })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Reduces a coordinate into `[0, side)`.
    #[inline]
    pub fn wrap(&self, v: f64) -> f64 {
        let w = v.rem_euclid(self.side);
        // rem_euclid can round up to exactly `side` for tiny negative inputs
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    /// Displacement reduced to the minimal image, in `[-side/2, side/2)`.
    #[inline]
    pub fn minimal_image(&self, d: f64) -> f64 {
        d - self.side * (d / self.side).round()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub mid: Point,
    /// Orientation in `[0, pi)`.
    pub theta: f64,
    pub len: f64,
}

impl Segment {
    #[inline]
    fn half_extent(&self) -> (f64, f64) {
        let h = 0.5 * self.len;
        (h * self.theta.cos(), h * self.theta.sin())
    }

    /// Endpoints wrapped onto the torus.
    pub fn endpoints(&self, region: &TorusRegion) -> (Point, Point) {
        let (hx, hy) = self.half_extent();
        (
            Point::new(region.wrap(self.mid.x - hx), region.wrap(self.mid.y - hy)),
            Point::new(region.wrap(self.mid.x + hx), region.wrap(self.mid.y + hy)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
    pub total_length: f64,
}

impl SegmentSet {
    pub fn new(segments: Vec<Segment>) -> Self {
        let total_length = segments.iter().map(|s| s.len).sum();
        Self {
            segments,
            total_length,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Shifts every segment by `(dx, dy)` and wraps the midpoints.
    pub fn translated(&self, dx: f64, dy: f64, region: &TorusRegion) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                mid: Point::new(region.wrap(s.mid.x + dx), region.wrap(s.mid.y + dy)),
                ..*s
            })
            .collect();
        Self {
            segments,
            total_length: self.total_length,
        }
    }
}

/// Scatters `count` segments of length `seg_len` uniformly over the torus.
/// Draws `px`, `py`, `theta` per segment, in that order.
pub fn scatter<S: UnitSource + ?Sized>(
    src: &mut S,
    count: usize,
    seg_len: f64,
    region: &TorusRegion,
) -> Result<SegmentSet> {
    if count == 0 {
        return Err(Error::InvalidConfiguration(
            "a segment set needs at least one segment".into(),
        ));
    }
    check_length(seg_len, region)?;
    let side = region.side;
    let segments = (0..count)
        .map(|_| {
            let px = src.next_unit() * side;
            let py = src.next_unit() * side;
            let theta = src.next_unit() * PI;
            Segment {
                mid: Point::new(px, py),
                theta,
                len: seg_len,
            }
        })
        .collect();
    Ok(SegmentSet {
        segments,
        total_length: count as f64 * seg_len,
    })
}

fn check_length(len: f64, region: &TorusRegion) -> Result<()> {
    if !(len > 0.0 && len <= 0.5 * region.side) {
        return Err(Error::InvalidConfiguration(format!(
            "segment length {len} must lie in (0, side/2] = (0, {}]",
            0.5 * region.side
        )));
    }
    Ok(())
}

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[inline]
fn sign(v: f64, eps: f64) -> i8 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

#[inline]
fn within_box(a: Point, b: Point, p: Point, eps: f64) -> bool {
    p.x >= a.x.min(b.x) - eps
        && p.x <= a.x.max(b.x) + eps
        && p.y >= a.y.min(b.y) - eps
        && p.y <= a.y.max(b.y) + eps
}

/// Closed planar segment test `p1p2` vs `q1q2` by orientation signs.
/// `scale` sets the contact tolerance (the torus side).
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point, scale: f64) -> bool {
    let eps_len = CONTACT_EPS * scale;
    let eps_area = CONTACT_EPS * scale * scale;
    let d1 = sign(orient(p1, p2, q1), eps_area);
    let d2 = sign(orient(p1, p2, q2), eps_area);
    let d3 = sign(orient(q1, q2, p1), eps_area);
    let d4 = sign(orient(q1, q2, p2), eps_area);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(p1, p2, q1, eps_len))
        || (d2 == 0 && within_box(p1, p2, q2, eps_len))
        || (d3 == 0 && within_box(q1, q2, p1, eps_len))
        || (d4 == 0 && within_box(q1, q2, p2, eps_len))
}

/// Whether `a` and `b` intersect on the torus: `b` is moved to the periodic
/// image nearest `a`, then the planar test runs on the unwrapped endpoints.
#[inline]
pub fn torus_intersect(a: &Segment, b: &Segment, region: &TorusRegion) -> bool {
    let dx = region.minimal_image(b.mid.x - a.mid.x);
    let dy = region.minimal_image(b.mid.y - a.mid.y);
    let reach = 0.5 * (a.len + b.len);
    let eps = CONTACT_EPS * region.side;
    if dx.abs() > reach + eps || dy.abs() > reach + eps {
        return false;
    }
    let (ax, ay) = a.half_extent();
    let (bx, by) = b.half_extent();
    segments_intersect(
        Point::new(-ax, -ay),
        Point::new(ax, ay),
        Point::new(dx - bx, dy - by),
        Point::new(dx + bx, dy + by),
        region.side,
    )
}

/// Number of intersecting pairs `(a, b)` with `a` in `set_a` and `b` in `set_b`.
pub fn intersect_count(
    set_a: &SegmentSet,
    set_b: &SegmentSet,
    region: &TorusRegion,
) -> Result<u64> {
    for s in set_a.segments.iter().chain(&set_b.segments) {
        check_length(s.len, region)?;
    }
    Ok(set_a
        .segments
        .iter()
        .map(|a| {
            set_b
                .segments
                .iter()
                .filter(|b| torus_intersect(a, b, region))
                .count() as u64
        })
        .sum())
}

/// `2SL/(pi N)`.
pub fn estimate_area(total_s: f64, total_l: f64, intersections: u64) -> Result<f64> {
    if !(total_s > 0.0 && total_l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "total lengths must be positive, got S = {total_s}, L = {total_l}"
        )));
    }
    if intersections == 0 {
        return Err(Error::NoIntersections);
    }
    Ok(2.0 * total_s * total_l / (PI * intersections as f64))
}

/// Expected intersection count `2SL/(pi A)`.
pub fn expected_intersections(total_s: f64, total_l: f64, region: &TorusRegion) -> f64 {
    2.0 * total_s * total_l / (PI * region.area())
}

/// Writes both sets as CSV rows `px,py,theta,len,set` with set ids `A` and `B`.
pub fn write_scatter_csv<W: Write>(
    mut w: W,
    set_a: &SegmentSet,
    set_b: &SegmentSet,
) -> io::Result<()> {
    writeln!(w, "px,py,theta,len,set")?;
    for (id, set) in [("A", set_a), ("B", set_b)] {
        for s in &set.segments {
            writeln!(
                w,
                "{},{},{},{},{id}",
                crate::format::sig9(s.mid.x),
                crate::format::sig9(s.mid.y),
                crate::format::sig9(s.theta),
                crate::format::sig9(s.len)
            )?;
        }
    }
    Ok(())
}
