//! Convex (monotone chain) and concave (k-nearest-neighbor gift wrapping) hulls.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use crate::boundary::rings_to_geojson;
use crate::error::{Error, Result};
use crate::geom::{
    cross, ring_area, ring_contains, ring_is_simple, segments_intersect, PlanarPoint,
};
use crate::kde::Projection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullKind {
    Convex,
    Concave,
}

/// Counter-clockwise open ring around a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub kind: HullKind,
    pub ring: Vec<PlanarPoint>,
    pub k_used: Option<usize>,
}

impl Hull {
    pub fn area(&self) -> f64 {
        ring_area(&self.ring)
    }

    pub fn contains(&self, p: &PlanarPoint) -> bool {
        ring_contains(&self.ring, p)
    }

    pub fn to_geojson(&self, projection: &Projection) -> String {
        let mut props = Map::new();
        props.insert(
            "kind".into(),
            json!(match self.kind {
                HullKind::Convex => "convex",
                HullKind::Concave => "concave",
            }),
        );
        props.insert("k_used".into(), json!(self.k_used));
        props.insert("area_m2".into(), json!(self.area()));
        rings_to_geojson(std::slice::from_ref(&self.ring), projection, props).to_string()
    }
}

fn sorted_unique(points: &[PlanarPoint]) -> Result<Vec<PlanarPoint>> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput("non-finite point".into()));
    }
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    v.dedup();
    Ok(v)
}

fn monotone_chain(sorted: &[PlanarPoint]) -> Vec<PlanarPoint> {
    let mut lower: Vec<PlanarPoint> = Vec::new();
    for p in sorted {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<PlanarPoint> = Vec::new();
    for p in sorted.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn convex_hull(points: &[PlanarPoint]) -> Result<Hull> {
    let sorted = sorted_unique(points)?;
    let ring = monotone_chain(&sorted);
    if ring.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "{} distinct points span no area",
            sorted.len()
        )));
    }
    Ok(Hull {
        kind: HullKind::Convex,
        ring,
        k_used: None,
    })
}

/// Counter-clockwise angle in (0, 2pi] from `from` to `to`.
fn ccw_angle(from: (f64, f64), to: (f64, f64)) -> f64 {
    let a = to.1.atan2(to.0) - from.1.atan2(from.0);
    let a = a.rem_euclid(TAU);
    if a <= 0.0 {
        TAU
    } else {
        a
    }
}

fn k_nearest(pool: &[usize], pts: &[PlanarPoint], from: &PlanarPoint, k: usize) -> Vec<usize> {
    let mut c: Vec<(f64, usize)> = pool.iter().map(|&i| (from.dist2(&pts[i]), i)).collect();
    c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    c.truncate(k);
    c.into_iter().map(|(_, i)| i).collect()
}

fn try_concave(pts: &[PlanarPoint], k: usize) -> Option<Vec<usize>> {
    let n = pts.len();
    let first = (0..n)
        .min_by(|&a, &b| {
            pts[a]
                .y
                .total_cmp(&pts[b].y)
                .then(pts[a].x.total_cmp(&pts[b].x))
        })
        .unwrap();
    let mut pool: Vec<usize> = (0..n).filter(|&i| i != first).collect();
    let mut hull = vec![first];
    let mut current = first;
    let mut back = (-1.0, 0.0);
    let mut step = 0;
    loop {
        step += 1;
        if step == 4 {
            pool.push(first);
            pool.sort_unstable();
        }
        let mut cands = k_nearest(&pool, pts, &pts[current], k);
        let cur = pts[current];
        let alpha = |i: usize| ccw_angle(back, (pts[i].x - cur.x, pts[i].y - cur.y));
        cands.sort_by(|&a, &b| alpha(a).total_cmp(&alpha(b)).then(a.cmp(&b)));

        let h = hull.len();
        let chosen = cands.into_iter().find(|&c| {
            let closing = c == first;
            // Edges hull[e] -> hull[e + 1], skipping the one ending at `current`
            // and, when closing, the one starting at `first`.
            (0..h.saturating_sub(1)).all(|e| {
                if e + 2 == h || (closing && e == 0) {
                    return true;
                }
                !segments_intersect(&cur, &pts[c], &pts[hull[e]], &pts[hull[e + 1]])
            })
        })?;
        if chosen == first {
            break;
        }
        back = (cur.x - pts[chosen].x, cur.y - pts[chosen].y);
        hull.push(chosen);
        pool.retain(|&i| i != chosen);
        current = chosen;
        if hull.len() > n {
            return None;
        }
    }
    Some(hull)
}

/// Concave hull by k-nearest-neighbor gift wrapping, starting at `k0` neighbors and
/// widening until the ring is simple and holds every point. Falls back to the convex
/// hull once k reaches the point count.
pub fn concave_hull(points: &[PlanarPoint], k0: usize) -> Result<Hull> {
    if k0 < 3 {
        return Err(Error::param("k", format!("{k0} is below 3")));
    }
    let convex = convex_hull(points)?;
    let pts = sorted_unique(points)?;
    let n = pts.len();
    let mut k = k0;
    while k < n {
        if let Some(idx) = try_concave(&pts, k) {
            let ring: Vec<PlanarPoint> = idx.iter().map(|&i| pts[i]).collect();
            if ring.len() >= 3
                && crate::geom::signed_area2(&ring) > 0.0
                && ring_is_simple(&ring)
                && pts.iter().all(|p| ring_contains(&ring, p))
            {
                return Ok(Hull {
                    kind: HullKind::Concave,
                    ring,
                    k_used: Some(k),
                });
            }
        }
        k += 1;
    }
    Ok(Hull {
        kind: HullKind::Concave,
        ring: convex.ring,
        k_used: Some(n.saturating_sub(1).max(k0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<PlanarPoint> {
        v.iter().map(|(x, y)| PlanarPoint::new(*x, *y)).collect()
    }

    #[test]
    fn convex_examples() {
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]);
        let h = convex_hull(&sq).unwrap();
        assert_eq!(
            h.ring,
            pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
        );
        let tri = pts(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        assert_eq!(convex_hull(&tri).unwrap().area(), 6.0);
        assert!(matches!(
            convex_hull(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(convex_hull(&pts(&[(0.0, 0.0), (1.0, 1.0)])).is_err());
        // Collinear boundary points are dropped.
        let edge = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        assert_eq!(convex_hull(&edge).unwrap().ring.len(), 4);
    }

    #[test]
    fn concave_on_square_is_square() {
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let h = concave_hull(&sq, 3).unwrap();
        assert_eq!(h.area(), 1.0);
        assert_eq!(h.ring.len(), 4);
        assert!(concave_hull(&sq, 2).is_err());
    }

    fn c_shape() -> Vec<PlanarPoint> {
        let mut v = Vec::new();
        for i in 0..6 {
            let t = (45.0 + 54.0 * i as f64).to_radians();
            v.push(PlanarPoint::new(10.0 * t.cos(), 10.0 * t.sin()));
            v.push(PlanarPoint::new(6.0 * t.cos(), 6.0 * t.sin()));
        }
        v
    }

    #[test]
    fn concave_c_shape_is_smaller() {
        let p = c_shape();
        assert_eq!(p.len(), 12);
        let convex = convex_hull(&p).unwrap();
        let concave = concave_hull(&p, 3).unwrap();
        assert!(
            concave.area() < convex.area(),
            "{} vs {}",
            concave.area(),
            convex.area()
        );
        assert!(p.iter().all(|q| concave.contains(q)));
        assert!(ring_is_simple(&concave.ring));
    }

    #[test]
    fn ccw_angle_range() {
        assert_eq!(ccw_angle((-1.0, 0.0), (1.0, 0.0)), std::f64::consts::PI);
        assert_eq!(ccw_angle((1.0, 0.0), (2.0, 0.0)), TAU);
        assert!((ccw_angle((1.0, 0.0), (0.0, 1.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    fn arb_points() -> impl Strategy<Value = Vec<PlanarPoint>> {
        prop::collection::vec(
            (0.0f64..100.0, 0.0f64..100.0).prop_map(|(x, y)| PlanarPoint::new(x, y)),
            3..60,
        )
    }

    proptest! {
        #[test]
        fn hulls_contain_all_points(p in arb_points(), k0 in 3usize..8) {
            let Ok(convex) = convex_hull(&p) else { return Ok(()); };
            let concave = concave_hull(&p, k0).unwrap();
            for q in &p {
                prop_assert!(convex.contains(q));
                prop_assert!(concave.contains(q));
            }
            prop_assert!(concave.area() <= convex.area() * (1.0 + 1e-12));
            prop_assert!(ring_is_simple(&concave.ring));
            // Every point is left of or on every convex edge.
            let n = convex.ring.len();
            for i in 0..n {
                let (a, b) = (convex.ring[i], convex.ring[(i + 1) % n]);
                for q in &p {
                    prop_assert!(cross(&a, &b, q) >= 0.0);
                }
            }
        }
    }
}
