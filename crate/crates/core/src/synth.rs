//! Synthetic geo-tagged corpora with known ground truth, and region overlap scoring.
//!
//! Randomness comes from ChaCha8 seeded with the spec's 64-bit seed, so a given
//! (spec, n, seed) always yields the same posts.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use crate::boundary::{rings_to_geojson, BoundarySet};
use crate::error::{Error, Result};
use crate::geom::{PlanarBBox, PlanarPoint};
use crate::ingest::{GeoBBox, GeoPost, Platform, Season};
use crate::kde::Projection;

pub const DEFAULT_YEAR: i32 = 2015;
pub const IOU_GRID: usize = 512;
const SOURCE: &str = "synth";
const NEUTRAL_WORDS: &[&str] = &[
    "coffee", "traffic", "sunset", "lunch", "weekend", "music", "friends", "work", "weather",
    "dinner", "morning", "happy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthKind {
    Disk,
    Polyline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabTerm {
    pub term: String,
    pub p: f64,
}

fn default_weights() -> BTreeMap<Season, f64> {
    Season::ALL.iter().map(|s| (*s, 1.0)).collect()
}

fn default_year() -> i32 {
    DEFAULT_YEAR
}

/// Generator parameters. Planar geometry is relative to (`origin_lon`, `origin_lat`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub kind: TruthKind,
    pub place_name: String,
    pub origin_lon: f64,
    pub origin_lat: f64,
    #[serde(default = "origin_point")]
    pub center: PlanarPoint,
    #[serde(default)]
    pub vertices: Vec<PlanarPoint>,
    pub sigma: f64,
    #[serde(default = "default_weights")]
    pub season_weights: BTreeMap<Season, f64>,
    #[serde(default)]
    pub vocab: Vec<VocabTerm>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_year")]
    pub year: i32,
}

fn origin_point() -> PlanarPoint {
    PlanarPoint::new(0.0, 0.0)
}

impl TruthSpec {
    pub fn disk(
        place_name: &str,
        projection: Projection,
        center: PlanarPoint,
        sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: TruthKind::Disk,
            place_name: place_name.to_string(),
            origin_lon: projection.origin_lon,
            origin_lat: projection.origin_lat,
            center,
            vertices: Vec::new(),
            sigma,
            season_weights: default_weights(),
            vocab: Vec::new(),
            seed,
            year: DEFAULT_YEAR,
        }
    }

    pub fn polyline(
        place_name: &str,
        projection: Projection,
        vertices: Vec<PlanarPoint>,
        sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: TruthKind::Polyline,
            vertices,
            ..Self::disk(
                place_name,
                projection,
                PlanarPoint::new(0.0, 0.0),
                sigma,
                seed,
            )
        }
    }

    pub fn projection(&self) -> Result<Projection> {
        Projection::new(self.origin_lon, self.origin_lat)
    }

    pub fn validate(&self) -> Result<()> {
        if self.place_name.trim().is_empty() {
            return Err(Error::param("place_name", "empty"));
        }
        self.projection()?;
        let sigma_ok = match self.kind {
            TruthKind::Disk => self.sigma.is_finite() && self.sigma > 0.0,
            TruthKind::Polyline => self.sigma.is_finite() && self.sigma >= 0.0,
        };
        if !sigma_ok {
            return Err(Error::param(
                "sigma",
                format!("{} is out of range", self.sigma),
            ));
        }
        match self.kind {
            TruthKind::Disk if !self.center.is_finite() => {
                return Err(Error::param("center", "not finite"))
            }
            TruthKind::Polyline => {
                if self.vertices.len() < 2 || self.vertices.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("vertices", "need at least 2 finite vertices"));
                }
                if polyline_length(&self.vertices) <= 0.0 {
                    return Err(Error::param("vertices", "polyline has zero length"));
                }
            }
            _ => {}
        }
        check_weights(&self.season_weights)?;
        for v in &self.vocab {
            if !(0.0..=1.0).contains(&v.p) {
                return Err(Error::param(
                    "vocab",
                    format!("probability {} of `{}` is outside [0, 1]", v.p, v.term),
                ));
            }
        }
        Ok(())
    }

    /// Disk of radius 2 sigma, or the polyline buffered by 2 sigma.
    pub fn truth_region(&self) -> TruthRegion {
        match self.kind {
            TruthKind::Disk => TruthRegion::Disk {
                center: self.center,
                radius: 2.0 * self.sigma,
            },
            TruthKind::Polyline => TruthRegion::Buffer {
                vertices: self.vertices.clone(),
                radius: 2.0 * self.sigma,
            },
        }
    }
}

fn check_weights(weights: &BTreeMap<Season, f64>) -> Result<()> {
    if weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::param(
            "season_weights",
            "weights must be finite and >= 0",
        ));
    }
    if weights.values().sum::<f64>() <= 0.0 {
        return Err(Error::param(
            "season_weights",
            "at least one weight must be positive",
        ));
    }
    Ok(())
}

fn polyline_length(v: &[PlanarPoint]) -> f64 {
    v.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

/// First instant of `season` in `year`, and the first instant after it.
/// Winter runs from December of `year` through February of the next year.
pub fn season_span(season: Season, year: i32) -> (DateTime<Utc>, DateTime<Utc>) {
    let at = |y: i32, m: u32| Utc.with_ymd_and_hms(y, m, 1, 0, 0, 0).unwrap();
    match season {
        Season::Spring => (at(year, 3), at(year, 6)),
        Season::Summer => (at(year, 6), at(year, 9)),
        Season::Fall => (at(year, 9), at(year, 12)),
        Season::Winter => (at(year, 12), at(year + 1, 3)),
    }
}

fn draw_timestamp(
    rng: &mut ChaCha8Rng,
    weights: &BTreeMap<Season, f64>,
    year: i32,
) -> DateTime<Utc> {
    let total: f64 = weights.values().sum();
    let mut u = rng.random::<f64>() * total;
    let mut season = Season::Spring;
    for (s, w) in weights {
        if *w <= 0.0 {
            continue;
        }
        season = *s;
        if u < *w {
            break;
        }
        u -= w;
    }
    let (start, end) = season_span(season, year);
    let secs = (end - start).num_seconds();
    start + Duration::seconds(rng.random_range(0..secs))
}

fn place_text(rng: &mut ChaCha8Rng, spec: &TruthSpec) -> String {
    let mut text = spec.place_name.clone();
    for v in &spec.vocab {
        if rng.random::<f64>() < v.p {
            text.push(' ');
            text.push_str(&v.term);
        }
    }
    text
}

fn make_post(
    id: String,
    ts: DateTime<Utc>,
    projection: &Projection,
    p: &PlanarPoint,
    text: String,
) -> Result<GeoPost> {
    let (lon, lat) = projection.unproject(p);
    GeoPost::new(id, ts, lon, lat, text, SOURCE, Platform::Other)
}

/// Posts scattered by an isotropic Gaussian around the spec's center.
pub fn gen_blob(spec: &TruthSpec, n: usize) -> Result<Vec<GeoPost>> {
    if spec.kind != TruthKind::Disk {
        return Err(Error::param("kind", "blob generation needs a disk spec"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    spec.validate()?;
    let projection = spec.projection()?;
    let normal = Normal::new(0.0, spec.sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..n)
        .map(|i| {
            let dx = normal.sample(&mut rng);
            let dy = normal.sample(&mut rng);
            let p = PlanarPoint::new(spec.center.x + dx, spec.center.y + dy);
            let ts = draw_timestamp(&mut rng, &spec.season_weights, spec.year);
            let text = place_text(&mut rng, spec);
            make_post(format!("blob-{}-{i}", spec.seed), ts, &projection, &p, text)
        })
        .collect()
}

/// Posts spread uniformly by arc length along the polyline, jittered perpendicular
/// to their segment.
pub fn gen_polyline(spec: &TruthSpec, n: usize) -> Result<Vec<GeoPost>> {
    if spec.kind != TruthKind::Polyline {
        return Err(Error::param(
            "kind",
            "polyline generation needs a polyline spec",
        ));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    spec.validate()?;
    let projection = spec.projection()?;
    let mut cumulative = vec![0.0];
    for w in spec.vertices.windows(2) {
        cumulative.push(cumulative.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cumulative.last().unwrap();
    let normal = (spec.sigma > 0.0).then(|| Normal::new(0.0, spec.sigma).expect("sigma validated"));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..n)
        .map(|i| {
            let s = rng.random::<f64>() * total;
            let seg = cumulative
                .partition_point(|c| *c <= s)
                .clamp(1, spec.vertices.len() - 1)
                - 1;
            let (a, b) = (spec.vertices[seg], spec.vertices[seg + 1]);
            let len = a.dist(&b);
            let t = if len > 0.0 {
                ((s - cumulative[seg]) / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let offset = normal.map_or(0.0, |nd| nd.sample(&mut rng));
            let (ux, uy) = if len > 0.0 {
                ((b.x - a.x) / len, (b.y - a.y) / len)
            } else {
                (1.0, 0.0)
            };
            let p = PlanarPoint::new(
                a.x + t * (b.x - a.x) - uy * offset,
                a.y + t * (b.y - a.y) + ux * offset,
            );
            let ts = draw_timestamp(&mut rng, &spec.season_weights, spec.year);
            let text = place_text(&mut rng, spec);
            make_post(format!("line-{}-{i}", spec.seed), ts, &projection, &p, text)
        })
        .collect()
}

/// Background posts uniform over `bbox` and over the default year, with neutral text.
pub fn gen_uniform(bbox: &GeoBBox, n: usize, seed: u64) -> Result<Vec<GeoPost>> {
    gen_uniform_with(bbox, n, seed, &default_weights(), DEFAULT_YEAR)
}

/// Background posts uniform over `bbox`, seasons drawn by `weights`.
pub fn gen_uniform_with(
    bbox: &GeoBBox,
    n: usize,
    seed: u64,
    weights: &BTreeMap<Season, f64>,
    year: i32,
) -> Result<Vec<GeoPost>> {
    bbox.validate()?;
    check_weights(weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let lon = bbox.min_lon + rng.random::<f64>() * (bbox.max_lon - bbox.min_lon);
            let lat = bbox.min_lat + rng.random::<f64>() * (bbox.max_lat - bbox.min_lat);
            let ts = draw_timestamp(&mut rng, weights, year);
            let words = rng.random_range(2..=5);
            let text: Vec<&str> = (0..words)
                .map(|_| NEUTRAL_WORDS[rng.random_range(0..NEUTRAL_WORDS.len())])
                .collect();
            GeoPost::new(
                format!("bg-{seed}-{i}"),
                ts,
                lon,
                lat,
                text.join(" "),
                SOURCE,
                Platform::Other,
            )
        })
        .collect()
}

/// Planar area with a membership test, for overlap scoring.
pub trait Region {
    fn contains_point(&self, p: &PlanarPoint) -> bool;
    /// Bounding box, or `None` when the region is empty.
    fn bounds(&self) -> Option<PlanarBBox>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TruthRegion {
    Disk {
        center: PlanarPoint,
        radius: f64,
    },
    Buffer {
        vertices: Vec<PlanarPoint>,
        radius: f64,
    },
}

fn segment_dist2(p: &PlanarPoint, a: &PlanarPoint, b: &PlanarPoint) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist2(&PlanarPoint::new(a.x + t * dx, a.y + t * dy))
}

impl TruthRegion {
    pub fn contains(&self, p: &PlanarPoint) -> bool {
        match self {
            TruthRegion::Disk { center, radius } => p.dist2(center) <= radius * radius,
            TruthRegion::Buffer { vertices, radius } => vertices
                .windows(2)
                .any(|w| segment_dist2(p, &w[0], &w[1]) <= radius * radius),
        }
    }

    pub fn to_geojson(&self, projection: &Projection) -> String {
        match self {
            TruthRegion::Disk { center, radius } => {
                let ring: Vec<PlanarPoint> = (0..128)
                    .map(|i| {
                        let t = i as f64 / 128.0 * std::f64::consts::TAU;
                        PlanarPoint::new(center.x + radius * t.cos(), center.y + radius * t.sin())
                    })
                    .collect();
                let mut props = Map::new();
                props.insert("kind".into(), json!("disk"));
                props.insert("radius_m".into(), json!(radius));
                rings_to_geojson(&[ring], projection, props).to_string()
            }
            TruthRegion::Buffer { vertices, radius } => {
                let coords: Vec<_> = vertices
                    .iter()
                    .map(|v| {
                        let (lon, lat) = projection.unproject(v);
                        json!([(lon * 1e7).round() / 1e7, (lat * 1e7).round() / 1e7])
                    })
                    .collect();
                json!({
                    "type": "Feature",
                    "geometry": { "type": "LineString", "coordinates": coords },
                    "properties": { "kind": "buffer", "buffer_m": radius },
                })
                .to_string()
            }
        }
    }
}

impl Region for TruthRegion {
    fn contains_point(&self, p: &PlanarPoint) -> bool {
        self.contains(p)
    }

    fn bounds(&self) -> Option<PlanarBBox> {
        match self {
            TruthRegion::Disk { center, radius } if *radius > 0.0 => Some(PlanarBBox {
                min_x: center.x - radius,
                min_y: center.y - radius,
                max_x: center.x + radius,
                max_y: center.y + radius,
            }),
            TruthRegion::Buffer { vertices, radius } if *radius > 0.0 => {
                PlanarBBox::enclosing(vertices).map(|b| PlanarBBox {
                    min_x: b.min_x - radius,
                    min_y: b.min_y - radius,
                    max_x: b.max_x + radius,
                    max_y: b.max_y + radius,
                })
            }
            _ => None,
        }
    }
}

impl Region for BoundarySet {
    fn contains_point(&self, p: &PlanarPoint) -> bool {
        self.contains(p)
    }

    fn bounds(&self) -> Option<PlanarBBox> {
        PlanarBBox::enclosing(self.polygons.iter().flatten())
    }
}

/// Intersection over union, sampled at the cell centers of a 512 x 512 grid over
/// the combined bounding box. Two empty regions score 0.
pub fn iou<A: Region + Sync + ?Sized, B: Region + Sync + ?Sized>(a: &A, b: &B) -> f64 {
    let bbox = match (a.bounds(), b.bounds()) {
        (Some(x), Some(y)) => x.union(&y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return 0.0,
    };
    if !(bbox.width() > 0.0 && bbox.height() > 0.0) {
        return 0.0;
    }
    let (sx, sy) = (
        bbox.width() / IOU_GRID as f64,
        bbox.height() / IOU_GRID as f64,
    );
    let (inter, union) = (0..IOU_GRID)
        .into_par_iter()
        .map(|row| {
            let y = bbox.min_y + (row as f64 + 0.5) * sy;
            let mut counts = (0u64, 0u64);
            for col in 0..IOU_GRID {
                let p = PlanarPoint::new(bbox.min_x + (col as f64 + 0.5) * sx, y);
                let (ia, ib) = (a.contains_point(&p), b.contains_point(&p));
                counts.0 += u64::from(ia && ib);
                counts.1 += u64::from(ia || ib);
            }
            counts
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{assign_season, parse_posts};

    fn proj() -> Projection {
        Projection::new(-117.07, 32.77).unwrap()
    }

    fn blob_spec(seed: u64) -> TruthSpec {
        let mut s = TruthSpec::disk(
            "Aztec Campus",
            proj(),
            PlanarPoint::new(0.0, 0.0),
            400.0,
            seed,
        );
        s.vocab = vec![
            VocabTerm {
                term: "library".into(),
                p: 0.5,
            },
            VocabTerm {
                term: "football".into(),
                p: 0.0,
            },
        ];
        s
    }

    #[test]
    fn blob_count_mean_and_determinism() {
        let spec = blob_spec(7);
        let posts = gen_blob(&spec, 500).unwrap();
        assert_eq!(posts.len(), 500);
        let p = proj();
        let pts: Vec<_> = posts
            .iter()
            .map(|q| p.project(q.lon, q.lat).unwrap())
            .collect();
        let mx = pts.iter().map(|q| q.x).sum::<f64>() / 500.0;
        let my = pts.iter().map(|q| q.y).sum::<f64>() / 500.0;
        let bound = 5.0 * 400.0 / (500f64).sqrt();
        assert!(mx.abs() < bound && my.abs() < bound, "{mx} {my}");
        assert_eq!(gen_blob(&spec, 500).unwrap(), posts);
        assert_ne!(gen_blob(&blob_spec(8), 500).unwrap(), posts);
        assert!(posts.iter().all(|q| q.text.starts_with("Aztec Campus")));
        assert!(posts.iter().all(|q| !q.text.contains("football")));
        assert!(posts.iter().any(|q| q.text.contains("library")));
    }

    #[test]
    fn posts_round_trip_through_parser() {
        let posts = gen_blob(&blob_spec(3), 50).unwrap();
        let lines: Vec<String> = posts.iter().map(GeoPost::to_json_line).collect();
        let (back, skipped) = parse_posts(lines.iter(), true).unwrap();
        assert_eq!(skipped, 0);
        assert_eq!(back, posts);
    }

    #[test]
    fn season_weights_shape_timestamps() {
        let mut spec = blob_spec(11);
        spec.season_weights = [
            (Season::Spring, 1.0),
            (Season::Summer, 0.0),
            (Season::Fall, 0.0),
            (Season::Winter, 1.0),
        ]
        .into();
        let posts = gen_blob(&spec, 400).unwrap();
        let spring = posts
            .iter()
            .filter(|p| assign_season(&p.timestamp) == Season::Spring)
            .count();
        let winter = posts
            .iter()
            .filter(|p| assign_season(&p.timestamp) == Season::Winter)
            .count();
        assert_eq!(spring + winter, 400);
        assert!(spring > 140 && winter > 140);
        spec.season_weights = [(Season::Spring, 0.0)].into();
        assert!(gen_blob(&spec, 1).is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut s = blob_spec(1);
        s.sigma = 0.0;
        assert!(gen_blob(&s, 10).is_err());
        assert!(gen_blob(&blob_spec(1), 0).is_err());
        let mut s = blob_spec(1);
        s.vocab[0].p = 1.5;
        assert!(gen_blob(&s, 10).is_err());
        let line = TruthSpec::polyline("I-5", proj(), vec![PlanarPoint::new(0.0, 0.0)], 10.0, 1);
        assert!(gen_polyline(&line, 10).is_err());
        assert!(gen_blob(&line, 10).is_err());
    }

    #[test]
    fn uniform_support_and_quadrants() {
        let bbox = GeoBBox::new(-117.2, 32.7, -117.1, 32.8).unwrap();
        assert!(gen_uniform(&bbox, 0, 1).unwrap().is_empty());
        let posts = gen_uniform(&bbox, 10_000, 5).unwrap();
        assert!(posts.iter().all(|p| bbox.contains(p.lon, p.lat)));
        let (cl, ca) = bbox.center();
        let mut q = [0usize; 4];
        for p in &posts {
            q[usize::from(p.lon >= cl) + 2 * usize::from(p.lat >= ca)] += 1;
        }
        // Binomial(10000, 1/4): sd ~ 43.3.
        for c in q {
            assert!((c as f64 - 2500.0).abs() <= 4.0 * 43.3, "{q:?}");
        }
        assert!(posts.iter().all(|p| !p.text.contains("Aztec")));
        assert!(gen_uniform(
            &GeoBBox {
                min_lon: 1.0,
                min_lat: 1.0,
                max_lon: 1.0,
                max_lat: 2.0
            },
            5,
            1
        )
        .is_err());
    }

    #[test]
    fn polyline_generation() {
        let verts = vec![
            PlanarPoint::new(0.0, 0.0),
            PlanarPoint::new(1000.0, 0.0),
            PlanarPoint::new(1000.0, 2000.0),
        ];
        let exact = TruthSpec::polyline("I-5", proj(), verts.clone(), 0.0, 4);
        let posts = gen_polyline(&exact, 300).unwrap();
        assert_eq!(posts.len(), 300);
        let p = proj();
        for q in &posts {
            let pt = p.project(q.lon, q.lat).unwrap();
            let d = verts
                .windows(2)
                .map(|w| segment_dist2(&pt, &w[0], &w[1]))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            assert!(d < 1e-6, "{d}");
        }
        let jitter = TruthSpec::polyline(
            "I-5",
            proj(),
            vec![PlanarPoint::new(0.0, 0.0), PlanarPoint::new(5000.0, 0.0)],
            50.0,
            4,
        );
        let posts = gen_polyline(&jitter, 1000).unwrap();
        let mean_y = posts
            .iter()
            .map(|q| p.project(q.lon, q.lat).unwrap().y)
            .sum::<f64>()
            / 1000.0;
        assert!(mean_y.abs() < 5.0 * 50.0 / (1000f64).sqrt(), "{mean_y}");
    }

    fn square(x0: f64, y0: f64) -> BoundarySet {
        BoundarySet::from_rings(
            vec![vec![
                PlanarPoint::new(x0, y0),
                PlanarPoint::new(x0 + 1.0, y0),
                PlanarPoint::new(x0 + 1.0, y0 + 1.0),
                PlanarPoint::new(x0, y0 + 1.0),
            ]],
            0.0,
            None,
        )
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&square(0.0, 0.0), &square(0.0, 0.0)), 1.0);
        assert_eq!(iou(&square(0.0, 0.0), &square(3.0, 3.0)), 0.0);
        let half = iou(&square(0.0, 0.0), &square(0.5, 0.0));
        assert!((half - 1.0 / 3.0).abs() < 0.005, "{half}");
        assert_eq!(half, iou(&square(0.5, 0.0), &square(0.0, 0.0)));
        let empty = BoundarySet::empty(0.0, None);
        assert_eq!(iou(&empty, &empty), 0.0);
        let disk = TruthRegion::Disk {
            center: PlanarPoint::new(0.0, 0.0),
            radius: 1.0,
        };
        assert_eq!(iou(&disk, &disk), 1.0);
        assert_eq!(iou(&disk, &empty), 0.0);
    }

    #[test]
    fn truth_geojson() {
        let disk = blob_spec(1).truth_region();
        let v: serde_json::Value = serde_json::from_str(&disk.to_geojson(&proj())).unwrap();
        assert_eq!(
            v["geometry"]["coordinates"][0][0].as_array().unwrap().len(),
            129
        );
        let b = BoundarySet::from_geojson(&disk.to_geojson(&proj()), &proj()).unwrap();
        assert!((iou(&b, &disk) - 1.0).abs() < 0.01);
    }

    #[test]
    fn spec_from_toml_like_json() {
        let text = r#"{"kind":"disk","place_name":"SDSU","origin_lon":-117.07,"origin_lat":32.77,"sigma":400,
            "season_weights":{"spring":1.0,"summer":0.4},"seed":3}"#;
        let s: TruthSpec = serde_json::from_str(text).unwrap();
        assert_eq!(s.season_weights[&Season::Summer], 0.4);
        assert_eq!(s.center, PlanarPoint::new(0.0, 0.0));
        s.validate().unwrap();
    }
}
