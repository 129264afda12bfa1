use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::domain::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Axis-aligned plot rectangle anchored at the origin, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { width: 14.0, height: 13.0 }
    }
}

impl Bounds {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    /// Reflects a point that left the rectangle back inside it.
    pub fn reflect(&self, p: Point) -> Point {
        fn fold(v: f64, max: f64) -> f64 {
            let mut v = v;
            // a couple of folds suffice for displacements shorter than the plot
            for _ in 0..4 {
                if v < 0.0 {
                    v = -v;
                } else if v > max {
                    v = 2.0 * max - v;
                } else {
                    break;
                }
            }
            v.clamp(0.0, max)
        }
        Point::new(fold(p.x, self.width), fold(p.y, self.height))
    }

    /// Corners counter-clockwise from the origin.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(0.0, 0.0),
            Point::new(self.width, 0.0),
            Point::new(self.width, self.height),
            Point::new(0.0, self.height),
        ]
    }
}

/// Shoelace area, positive for counter-clockwise rings.
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn perimeter(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].distance(ring[(i + 1) % n])).sum()
}

/// Unsigned angle at `at` between the segments towards `prev` and `next`, in `[0, pi]`.
pub fn corner_angle(prev: Point, at: Point, next: Point) -> f64 {
    let a = prev - at;
    let b = next - at;
    a.cross(b).abs().atan2(a.dot(b))
}

/// Area precision of a unit: `A / At` below target, `At / A` above it.
pub fn area_precision(area: f64, target: f64) -> f64 {
    debug_assert!(target > 0.0);
    if area <= 0.0 {
        0.0
    } else if area < target {
        area / target
    } else {
        target / area
    }
}

/// `2 pi A / P^2`, clamped to `[0, 1]`. A circle scores 0.5, a square pi/8.
pub fn compactness(area: f64, perimeter: f64) -> Result<f64, DomainError> {
    if !perimeter.is_finite() || perimeter <= 0.0 {
        return Err(DomainError::InvalidGeometry(format!("perimeter {perimeter} is not positive")));
    }
    Ok((2.0 * PI * area / (perimeter * perimeter)).clamp(0.0, 1.0))
}

pub fn polygon_compactness(ring: &[Point]) -> Result<f64, DomainError> {
    compactness(signed_area(ring).abs(), perimeter(ring))
}

/// Piecewise-linear score of a wall angle: 1 at right and straight angles,
/// 0.5 at 3pi/4, 0 for a degenerate spike.
pub fn orthogonality(theta: f64) -> Result<f64, DomainError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(DomainError::AngleOutOfRange(theta));
    }
    let t = theta / FRAC_PI_2;
    Ok(if theta < FRAC_PI_2 {
        t
    } else if theta < 3.0 * PI / 4.0 {
        2.0 - t
    } else {
        t - 1.0
    })
}

/// Proper intersection test for two closed segments.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        (q - p).cross(r - p)
    }
    fn on_segment(p: Point, q: Point, r: Point) -> bool {
        r.x >= p.x.min(q.x) - 1e-12
            && r.x <= p.x.max(q.x) + 1e-12
            && r.y >= p.y.min(q.y) - 1e-12
            && r.y <= p.y.max(q.y) + 1e-12
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True if no two non-adjacent edges of the closed ring intersect.
pub fn is_simple_ring(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}
