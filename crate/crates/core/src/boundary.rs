//! Contour boundaries extracted from rasters by marching squares.
//!
//! Samples sit at cell centers. The lattice is padded with a ring of samples on the
//! raster extent whose value equals the contour level, so regions touching the border
//! close along the extent. Saddles are resolved by the average of the four corners.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geom::{
    clean_ring, crossings_odd, on_ring_boundary, ring_area, signed_area2, PlanarBBox, PlanarPoint,
};
use crate::ingest::GeoPost;
use crate::kde::{GridGeometry, Projection, Raster};

/// Closed counter-clockwise rings around the regions above a contour level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub polygons: Vec<Vec<PlanarPoint>>,
    pub level: f64,
    pub source_grid: Option<GridGeometry>,
    #[serde(skip)]
    bounds: Vec<Option<PlanarBBox>>,
}

impl BoundarySet {
    /// Builds a set from open rings; rings are cleaned and oriented counter-clockwise.
    pub fn from_rings(
        rings: Vec<Vec<PlanarPoint>>,
        level: f64,
        source_grid: Option<GridGeometry>,
    ) -> Self {
        let polygons: Vec<_> = rings
            .into_iter()
            .filter_map(|mut r| {
                clean_ring(&mut r);
                if r.len() < 3 {
                    return None;
                }
                if signed_area2(&r) < 0.0 {
                    r.reverse();
                }
                Some(r)
            })
            .collect();
        let bounds = polygons.iter().map(PlanarBBox::enclosing).collect();
        Self {
            polygons,
            level,
            source_grid,
            bounds,
        }
    }

    pub fn empty(level: f64, source_grid: Option<GridGeometry>) -> Self {
        Self::from_rings(Vec::new(), level, source_grid)
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn ring_count(&self) -> usize {
        self.polygons.len()
    }

    /// Even-odd membership over all rings; points on any ring edge are inside.
    pub fn contains(&self, p: &PlanarPoint) -> bool {
        let mut inside = false;
        for (i, ring) in self.polygons.iter().enumerate() {
            if let Some(Some(b)) = self.bounds.get(i) {
                if !b.contains(p) {
                    continue;
                }
            }
            if on_ring_boundary(ring, p) {
                return true;
            }
            if crossings_odd(ring, p) {
                inside = !inside;
            }
        }
        inside
    }

    /// Sum of ring areas in square meters.
    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|r| ring_area(r)).sum()
    }

    pub fn to_geojson(&self, projection: &Projection) -> String {
        let mut props = Map::new();
        props.insert("level".into(), json!(self.level));
        props.insert("ring_count".into(), json!(self.ring_count()));
        rings_to_geojson(&self.polygons, projection, props).to_string()
    }

    /// Parses a GeoJSON MultiPolygon or Polygon (bare, as a Feature, or the first
    /// feature of a collection) back into planar rings.
    pub fn from_geojson(text: &str, projection: &Projection) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::GeoJson(e.to_string()))?;
        let (geometry, props) = match doc.get("type").and_then(Value::as_str) {
            Some("Feature") => (
                doc.get("geometry").cloned().unwrap_or(Value::Null),
                doc.get("properties").cloned(),
            ),
            Some("FeatureCollection") => {
                let first = doc
                    .get("features")
                    .and_then(Value::as_array)
                    .and_then(|f| f.first())
                    .ok_or_else(|| Error::GeoJson("empty FeatureCollection".into()))?;
                (
                    first.get("geometry").cloned().unwrap_or(Value::Null),
                    first.get("properties").cloned(),
                )
            }
            _ => (doc.clone(), None),
        };
        let level = props
            .as_ref()
            .and_then(|p| p.get("level"))
            .and_then(Value::as_f64)
            .unwrap_or(0.0);
        let polygons: Vec<&Value> = match geometry.get("type").and_then(Value::as_str) {
            Some("MultiPolygon") => geometry
                .get("coordinates")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::GeoJson("MultiPolygon without coordinates".into()))?
                .iter()
                .collect(),
            Some("Polygon") => vec![geometry
                .get("coordinates")
                .ok_or_else(|| Error::GeoJson("Polygon without coordinates".into()))?],
            other => {
                return Err(Error::GeoJson(format!(
                    "unsupported geometry type {other:?}"
                )))
            }
        };
        let mut rings = Vec::new();
        for poly in polygons {
            let poly = poly
                .as_array()
                .ok_or_else(|| Error::GeoJson("polygon is not an array".into()))?;
            for ring in poly {
                let ring = ring
                    .as_array()
                    .ok_or_else(|| Error::GeoJson("ring is not an array".into()))?;
                let mut pts = Vec::with_capacity(ring.len());
                for pos in ring {
                    let lon = pos.get(0).and_then(Value::as_f64);
                    let lat = pos.get(1).and_then(Value::as_f64);
                    let (Some(lon), Some(lat)) = (lon, lat) else {
                        return Err(Error::GeoJson("position needs two numbers".into()));
                    };
                    pts.push(projection.project(lon, lat)?);
                }
                if pts.len() > 1 && pts.first() == pts.last() {
                    pts.pop();
                }
                rings.push(pts);
            }
        }
        Ok(Self::from_rings(rings, level, None))
    }
}

fn round7(v: f64) -> f64 {
    (v * 1e7).round() / 1e7
}

/// GeoJSON Feature holding a MultiPolygon, one polygon per ring, in lon/lat.
pub fn rings_to_geojson(
    rings: &[Vec<PlanarPoint>],
    projection: &Projection,
    properties: Map<String, Value>,
) -> Value {
    let coords: Vec<Value> = rings
        .iter()
        .map(|ring| {
            let mut pos: Vec<Value> = ring
                .iter()
                .map(|p| {
                    let (lon, lat) = projection.unproject(p);
                    json!([round7(lon), round7(lat)])
                })
                .collect();
            if let Some(first) = pos.first().cloned() {
                pos.push(first);
            }
            json!([pos])
        })
        .collect();
    json!({
        "type": "Feature",
        "geometry": { "type": "MultiPolygon", "coordinates": coords },
        "properties": Value::Object(properties),
    })
}

/// Partitions posts by boundary membership, preserving order within each part.
pub fn split_corpus(
    posts: &[GeoPost],
    bset: &BoundarySet,
    projection: &Projection,
) -> Result<(Vec<GeoPost>, Vec<GeoPost>)> {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for post in posts {
        let p = projection.project(post.lon, post.lat)?;
        if bset.contains(&p) {
            inside.push(post.clone());
        } else {
            outside.push(post.clone());
        }
    }
    Ok((inside, outside))
}

/// Lattice edge carrying a crossing: horizontal edges join (i, j)-(i+1, j),
/// vertical edges join (i, j)-(i, j+1), in padded sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

struct Lattice<'a> {
    raster: &'a Raster,
    level: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Lattice<'_> {
    fn new(raster: &Raster, level: f64) -> Lattice<'_> {
        let g = raster.geometry();
        let axis = |origin: f64, n: usize| -> Vec<f64> {
            let mut v = Vec::with_capacity(n + 2);
            v.push(origin);
            v.extend((0..n).map(|k| origin + (k as f64 + 0.5) * g.cell_size));
            v.push(origin + n as f64 * g.cell_size);
            v
        };
        Lattice {
            raster,
            level,
            xs: axis(g.origin_x, g.n_cols),
            ys: axis(g.origin_y, g.n_rows),
        }
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        let g = self.raster.geometry();
        if i == 0 || j == 0 || i > g.n_cols || j > g.n_rows {
            self.level
        } else {
            self.raster.get(i - 1, j - 1)
        }
    }

    fn inside(&self, i: usize, j: usize) -> bool {
        self.value(i, j) > self.level
    }

    fn point(&self, i: usize, j: usize) -> PlanarPoint {
        PlanarPoint::new(self.xs[i], self.ys[j])
    }

    /// Interpolated crossing on an edge, computed from its lower-index end so both
    /// neighboring cells agree bit for bit.
    fn crossing(&self, e: EdgeId) -> PlanarPoint {
        let ((ai, aj), (bi, bj)) = match e {
            EdgeId::H(i, j) => ((i, j), (i + 1, j)),
            EdgeId::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (va, vb) = (self.value(ai, aj), self.value(bi, bj));
        if va == self.level {
            return self.point(ai, aj);
        }
        if vb == self.level {
            return self.point(bi, bj);
        }
        let t = (self.level - va) / (vb - va);
        let (pa, pb) = (self.point(ai, aj), self.point(bi, bj));
        PlanarPoint::new(pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y))
    }
}

struct Segment {
    via: Option<PlanarPoint>,
    end: EdgeId,
}

/// Marching-squares rings enclosing the cells whose value exceeds `level`.
pub fn contour(raster: &Raster, level: f64) -> BoundarySet {
    let g = *raster.geometry();
    let lat = Lattice::new(raster, level);
    let (ni, nj) = (g.n_cols + 2, g.n_rows + 2);
    let mut segments: HashMap<EdgeId, Segment> = HashMap::new();
    let mut order: Vec<EdgeId> = Vec::new();

    for j in 0..nj - 1 {
        for i in 0..ni - 1 {
            // Corners and the edges leaving them, counter-clockwise.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let edges = [
                EdgeId::H(i, j),
                EdgeId::V(i + 1, j),
                EdgeId::H(i, j + 1),
                EdgeId::V(i, j),
            ];
            let ins = corners.map(|(a, b)| lat.inside(a, b));
            let n_in = ins.iter().filter(|v| **v).count();
            if n_in == 0 || n_in == 4 {
                continue;
            }
            // Crossing k lies on the edge from corner k to corner k+1.
            let exits: Vec<usize> = (0..4).filter(|&k| ins[k] && !ins[(k + 1) % 4]).collect();
            let entries: Vec<usize> = (0..4).filter(|&k| !ins[k] && ins[(k + 1) % 4]).collect();
            let saddle = exits.len() == 2;
            let center_inside = saddle && {
                let sum: f64 = corners.iter().map(|&(a, b)| lat.value(a, b)).sum();
                sum / 4.0 > level
            };
            for &x in &exits {
                let next = (1..=4)
                    .map(|d| (x + d) % 4)
                    .find(|k| entries.contains(k))
                    .unwrap();
                let prev = (1..=4)
                    .map(|d| (x + 4 - d) % 4)
                    .find(|k| entries.contains(k))
                    .unwrap();
                let e = if !saddle || center_inside { next } else { prev };
                // A padded corner cell whose inner sample is inside bends around the extent corner.
                let via = if n_in == 1 && is_extent_corner_cell(i, j, ni, nj) {
                    let k = (0..4).find(|&k| ins[k]).unwrap();
                    let (ci, cj) = corners[(k + 2) % 4];
                    Some(lat.point(ci, cj))
                } else {
                    None
                };
                let start = edges[x];
                order.push(start);
                segments.insert(start, Segment { via, end: edges[e] });
            }
        }
    }

    let mut rings = Vec::new();
    for &start in &order {
        if !segments.contains_key(&start) {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        while let Some(seg) = segments.remove(&cur) {
            ring.push(lat.crossing(cur));
            if let Some(v) = seg.via {
                ring.push(v);
            }
            cur = seg.end;
        }
        rings.push(ring);
    }
    BoundarySet::from_rings(rings, level, Some(g))
}

fn is_extent_corner_cell(i: usize, j: usize, ni: usize, nj: usize) -> bool {
    (i == 0 || i == ni - 2) && (j == 0 || j == nj - 2)
}
