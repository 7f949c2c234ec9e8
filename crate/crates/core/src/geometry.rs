//! Planar primitives for the quadrant game: points, displacements and the
//! line/circle intersection that both lion strategies are built on.
//!
//! Distances are measured in move radii, so a legal move has length at most 1.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for geometric comparisons at game scale.
pub const GEOM_TOL: f64 = 1e-9;

/// Discriminants in `[-DISCRIMINANT_CLAMP, 0)` are treated as tangency.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;

/// Two points closer than this do not define a line.
pub const MIN_LINE_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("line endpoints coincide")]
    DegenerateLine,
}

/// A position in the plane. Game positions live in the closed quadrant
/// `x >= 0, y >= 0`; the engine enforces that, not the type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn in_quadrant(self) -> bool {
        self.is_finite() && self.x >= 0.0 && self.y >= 0.0
    }

    pub fn distance(self, other: Point) -> f64 {
        (other - self).norm()
    }

    /// Squared distance from the origin.
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// True when both coordinates are strictly greater than `other`'s.
    pub fn dominates(self, other: Point) -> bool {
        self.x > other.x && self.y > other.y
    }

    /// Bit-level equality, used where capture must copy coordinates exactly.
    pub fn bitwise_eq(self, other: Point) -> bool {
        self.x.to_bits() == other.x.to_bits() && self.y.to_bits() == other.y.to_bits()
    }
}

impl Displacement {
    pub const fn new(dx: f64, dy: f64) -> Self {
        Displacement { dx, dy }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Displacement { dx: c, dy: s }
    }

    pub fn is_finite(self) -> bool {
        self.dx.is_finite() && self.dy.is_finite()
    }

    pub fn norm(self) -> f64 {
        norm(self)
    }

    pub fn norm_sq(self) -> f64 {
        self.dx * self.dx + self.dy * self.dy
    }

    pub fn dot(self, other: Displacement) -> f64 {
        self.dx * other.dx + self.dy * other.dy
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Displacement) -> f64 {
        self.dx * other.dy - self.dy * other.dx
    }

    /// Rotation by +90 degrees.
    pub fn rotate_ccw(self) -> Self {
        Displacement {
            dx: -self.dy,
            dy: self.dx,
        }
    }

    /// Rotation by -90 degrees.
    pub fn rotate_cw(self) -> Self {
        Displacement {
            dx: self.dy,
            dy: -self.dx,
        }
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > MIN_LINE_SEPARATION && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn angle(self) -> f64 {
        self.dy.atan2(self.dx)
    }
}

/// Euclidean norm. Axis-aligned inputs come back exact.
pub fn norm(d: Displacement) -> f64 {
    if d.dx == 0.0 {
        d.dy.abs()
    } else if d.dy == 0.0 {
        d.dx.abs()
    } else {
        d.dx.hypot(d.dy)
    }
}

impl Sub for Point {
    type Output = Displacement;
    fn sub(self, rhs: Point) -> Displacement {
        Displacement {
            dx: self.x - rhs.x,
            dy: self.y - rhs.y,
        }
    }
}

impl Add<Displacement> for Point {
    type Output = Point;
    fn add(self, rhs: Displacement) -> Point {
        Point {
            x: self.x + rhs.dx,
            y: self.y + rhs.dy,
        }
    }
}

impl Sub<Displacement> for Point {
    type Output = Point;
    fn sub(self, rhs: Displacement) -> Point {
        Point {
            x: self.x - rhs.dx,
            y: self.y - rhs.dy,
        }
    }
}

impl Add for Displacement {
    type Output = Displacement;
    fn add(self, rhs: Displacement) -> Displacement {
        Displacement {
            dx: self.dx + rhs.dx,
            dy: self.dy + rhs.dy,
        }
    }
}

impl Sub for Displacement {
    type Output = Displacement;
    fn sub(self, rhs: Displacement) -> Displacement {
        Displacement {
            dx: self.dx - rhs.dx,
            dy: self.dy - rhs.dy,
        }
    }
}

impl Mul<f64> for Displacement {
    type Output = Displacement;
    fn mul(self, k: f64) -> Displacement {
        Displacement {
            dx: self.dx * k,
            dy: self.dy * k,
        }
    }
}

impl Neg for Displacement {
    type Output = Displacement;
    fn neg(self) -> Displacement {
        Displacement {
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// One intersection of a line with a circle. `s` is the line parameter, so
/// `point = line_a + s * (line_b - line_a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint {
    pub point: Point,
    pub s: f64,
}

/// Intersections of the circle `|P - circle_center| = radius` with the line
/// through `line_a` and `line_b`, sorted by line parameter.
///
/// Works from the foot of the perpendicular dropped from the circle center,
/// so the half-chord `sqrt(radius^2 - d^2)` never cancels, however far the
/// line endpoints are from the circle. A slightly negative `radius^2 - d^2`
/// (within [`DISCRIMINANT_CLAMP`] relative to `radius^2`) is treated as a
/// tangency.
pub fn line_circle_intersections(
    circle_center: Point,
    radius: f64,
    line_a: Point,
    line_b: Point,
) -> Result<Vec<LinePoint>, GeometryError> {
    let dir = line_b - line_a;
    let len = dir.norm();
    if len <= MIN_LINE_SEPARATION {
        return Err(GeometryError::DegenerateLine);
    }
    let u = dir * (1.0 / len);
    let normal = Displacement::new(u.dy, -u.dx);
    let offset = circle_center - line_a;
    let along = offset.dot(u);
    let d = offset.dot(normal);
    let mut half_sq = (radius - d.abs()) * (radius + d.abs());
    if half_sq < 0.0 {
        if half_sq >= -DISCRIMINANT_CLAMP * radius * radius {
            half_sq = 0.0;
        } else {
            return Ok(Vec::new());
        }
    }
    // Points are built from the circle center, so their distance from it is
    // exact up to rounding of the small offsets.
    let at = |t: f64| LinePoint {
        point: circle_center + normal * -d + u * t,
        s: (along + t) / len,
    };
    if half_sq == 0.0 {
        return Ok(vec![at(0.0)]);
    }
    let h = half_sq.sqrt();
    Ok(vec![at(-h), at(h)])
}

/// Largest `lambda` in `[0, 1]` with `from + lambda * step` inside the quadrant.
/// `from` must already be in the quadrant.
pub fn quadrant_step_limit(from: Point, step: Displacement) -> f64 {
    let mut limit: f64 = 1.0;
    if step.dx < 0.0 {
        limit = limit.min(from.x / -step.dx);
    }
    if step.dy < 0.0 {
        limit = limit.min(from.y / -step.dy);
    }
    limit.clamp(0.0, 1.0)
}

/// Move `from` by `lambda * step`, snapping coordinates that land a rounding
/// error below zero back onto the axis.
pub fn clipped_step(from: Point, step: Displacement, lambda: f64) -> Point {
    let p = from + step * lambda;
    Point::new(p.x.max(0.0), p.y.max(0.0))
}
