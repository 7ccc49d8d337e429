//! Planar geometry primitives shared by the controller and the mission engine.
//!
//! Everything here is exact closed-form arithmetic on `f64`; the engine relies
//! on these helpers for event detection (capture crossings, sensing-range
//! crossings, equidistance crossings) so no time discretization is needed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// A point (or displacement) in the planar mission space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance between two points.
pub fn distance(p: Point, q: Point) -> f64 {
    p.sub(q).norm()
}

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % TAU;
    if a < 0.0 {
        a += TAU;
    }
    // `% TAU` can return TAU itself for values just below a multiple of 2π.
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Unit vector for a heading angle.
pub fn heading_vector(heading: f64) -> Point {
    Point::new(heading.cos(), heading.sin())
}

/// Heading angle of the ray from `from` toward `to`, in `[0, 2π)`.
///
/// Returns `None` when the points coincide and the direction is undefined.
pub fn heading_toward(from: Point, to: Point) -> Option<f64> {
    let d = to.sub(from);
    if d.x == 0.0 && d.y == 0.0 {
        None
    } else {
        Some(normalize_angle(d.y.atan2(d.x)))
    }
}

/// Position reached from `position` after moving at `speed` along `heading`
/// for `dt` time units.
pub fn advance(position: Point, heading: f64, speed: f64, dt: f64) -> Point {
    position.add(heading_vector(heading).scale(speed * dt))
}

/// Axis-aligned bounding box; containment is boundary-inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Longest side, used for sensing ranges given as a fraction of the space.
    pub fn max_dimension(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
        )
    }
}

/// Earliest time `t` in `[0, max_t]` at which a point moving from `origin`
/// along `heading` at `speed` enters the closed disk around `center`.
///
/// Returns `Some(0.0)` when the origin already lies inside the disk.
pub fn disk_entry_time(
    origin: Point,
    heading: f64,
    speed: f64,
    max_t: f64,
    center: Point,
    radius: f64,
) -> Option<f64> {
    let rel = center.sub(origin);
    if rel.norm() <= radius {
        return Some(0.0);
    }
    if speed <= 0.0 {
        return None;
    }
    // Vector-projection form: the naive quadratic cancels catastrophically
    // when the radius is many orders below the distance (capture radii are
    // tolerance-sized), so compute the perpendicular miss explicitly.
    let u = heading_vector(heading);
    let along = rel.dot(u);
    let perp = rel.sub(u.scale(along)).norm();
    if perp > radius {
        return None;
    }
    let half_chord = (radius * radius - perp * perp).sqrt();
    let s_enter = along - half_chord;
    if s_enter < 0.0 {
        return None;
    }
    let t = s_enter / speed;
    (t <= max_t).then_some(t)
}

/// Time at which a point moving from `origin` along `heading` at `speed`
/// becomes equidistant from `a` and `b`.
///
/// The squared-distance difference is affine in travelled length, so each
/// pair crosses at most once; rays along the perpendicular bisector (or a
/// degenerate pair) yield `None`.
pub fn equidistance_time(origin: Point, heading: f64, speed: f64, a: Point, b: Point) -> Option<f64> {
    let u = heading_vector(heading);
    let slope = 2.0 * u.dot(b.sub(a));
    if slope == 0.0 || speed <= 0.0 {
        return None;
    }
    let da = origin.sub(a);
    let db = origin.sub(b);
    let offset = db.dot(db) - da.dot(da);
    Some(offset / slope / speed)
}
