//! Planar geometry primitives shared by the raster, boundary and hull code.
//!
//! Rings are stored open: the closing vertex is implied, never repeated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point in a local planar frame, meters east/north of the projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist2(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &PlanarPoint) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Axis-aligned planar rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarBBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl PlanarBBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let b = Self {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.min_x, self.min_y, self.max_x, self.max_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.min_x >= self.max_x || self.min_y >= self.max_y {
            return Err(Error::DegenerateBbox(format!(
                "[{}, {}] x [{}, {}]",
                self.min_x, self.max_x, self.min_y, self.max_y
            )));
        }
        Ok(())
    }

    /// Bounding box of a point set; `None` for an empty set. May be degenerate.
    pub fn enclosing<'a>(points: impl IntoIterator<Item = &'a PlanarPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in it {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn union(&self, other: &PlanarBBox) -> PlanarBBox {
        PlanarBBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn contains(&self, p: &PlanarPoint) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

/// Twice the signed area: positive for counter-clockwise rings.
pub fn signed_area2(ring: &[PlanarPoint]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc
}

pub fn ring_area(ring: &[PlanarPoint]) -> f64 {
    (signed_area2(ring) * 0.5).abs()
}

/// Cross product of (b - a) x (c - a).
pub fn cross(a: &PlanarPoint, b: &PlanarPoint, c: &PlanarPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Whether `p` lies on segment `ab`, with a tolerance relative to the segment scale.
pub fn on_segment(p: &PlanarPoint, a: &PlanarPoint, b: &PlanarPoint) -> bool {
    let len2 = a.dist2(b);
    if len2 == 0.0 {
        return p.dist2(a) <= f64::EPSILON;
    }
    let scale = len2.sqrt().max(p.x.abs().max(p.y.abs())).max(1.0);
    let c = cross(a, b, p);
    // c / |ab| is the perpendicular distance.
    if c.abs() / len2.sqrt() > 1e-9 * scale {
        return false;
    }
    let t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2;
    let slack = 1e-12 * scale;
    t >= -slack && t <= 1.0 + slack
}

pub fn on_ring_boundary(ring: &[PlanarPoint], p: &PlanarPoint) -> bool {
    let n = ring.len();
    (0..n).any(|i| on_segment(p, &ring[i], &ring[(i + 1) % n]))
}

/// Even-odd crossing test for a single ring; boundary points are not special-cased.
pub fn crossings_odd(ring: &[PlanarPoint], p: &PlanarPoint) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Boundary-inclusive point-in-ring test.
pub fn ring_contains(ring: &[PlanarPoint], p: &PlanarPoint) -> bool {
    if ring.len() < 3 {
        return false;
    }
    on_ring_boundary(ring, p) || crossings_odd(ring, p)
}

fn orient_sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Whether segments `p1p2` and `q1q2` intersect, including touching and collinear overlap.
pub fn segments_intersect(
    p1: &PlanarPoint,
    p2: &PlanarPoint,
    q1: &PlanarPoint,
    q2: &PlanarPoint,
) -> bool {
    let d1 = orient_sign(cross(q1, q2, p1));
    let d2 = orient_sign(cross(q1, q2, p2));
    let d3 = orient_sign(cross(p1, p2, q1));
    let d4 = orient_sign(cross(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let within = |a: &PlanarPoint, b: &PlanarPoint, c: &PlanarPoint| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    (d1 == 0 && within(q1, q2, p1))
        || (d2 == 0 && within(q1, q2, p2))
        || (d3 == 0 && within(p1, p2, q1))
        || (d4 == 0 && within(p1, p2, q2))
}

/// Whether a closed ring is simple: no two non-adjacent edges touch and no vertex repeats.
pub fn ring_is_simple(ring: &[PlanarPoint]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if ring[i] == ring[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let a1 = ring[i];
        let a2 = ring[(i + 1) % n];
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let b1 = ring[j];
            let b2 = ring[(j + 1) % n];
            if segments_intersect(&a1, &a2, &b1, &b2) {
                return false;
            }
        }
    }
    true
}

/// Drops consecutive duplicates and exactly collinear interior vertices.
pub(crate) fn clean_ring(ring: &mut Vec<PlanarPoint>) {
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mut changed = true;
    while changed && ring.len() >= 3 {
        changed = false;
        let n = ring.len();
        for i in 0..n {
            let prev = ring[(i + n - 1) % n];
            let next = ring[(i + 1) % n];
            if cross(&prev, &ring[i], &next) == 0.0 {
                ring.remove(i);
                changed = true;
                break;
            }
        }
    }
}
