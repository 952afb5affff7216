//! Small geometric helpers shared by every operation.

use crate::Point;

#[inline]
pub fn distance_squared(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Euclidean distance. All radius comparisons go through this function so
/// that oracles and implementations agree on boundary rounding.
#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    libm::sqrt(distance_squared(a, b))
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    /// Bounding box of a non-empty iterator of points.
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut bb = Aabb { min: first, max: first };
        for p in iter {
            for d in 0..3 {
                if p[d] < bb.min[d] {
                    bb.min[d] = p[d];
                }
                if p[d] > bb.max[d] {
                    bb.max[d] = p[d];
                }
            }
        }
        Some(bb)
    }

    pub fn center(&self) -> Point {
        [
            midpoint(self.min[0], self.max[0]),
            midpoint(self.min[1], self.max[1]),
            midpoint(self.min[2], self.max[2]),
        ]
    }

    pub fn extent(&self) -> Point {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }
}

/// `(lo + hi) / 2` without intermediate overflow. Halving is exact for
/// normal floats, so this equals the plain formula whenever it is finite.
#[inline]
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    lo * 0.5 + hi * 0.5
}
