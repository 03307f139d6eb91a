//! Feature-type classification and the end-to-end place-ontology pipeline.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::boundary::{contour, split_corpus, BoundarySet};
use crate::cluster::{concave_hull, convex_hull, dbscan, dmdbscan, largest_cluster, Hull};
use crate::error::{Error, Result, Stage, StageExt};
use crate::ingest::{slice_by_season, GeoBBox, GeoPost, PlaceQuery, Season};
use crate::kde::{
    kde, make_grid, normalize_diff, seasonal_change, ChangeMode, GridGeometry, KdeConfig,
    PlanarPoint, Projection, Raster, SearchRadius, SeasonalChange, DEFAULT_CELL_SIZE,
};
use crate::semantic::{term_table, TableScope, TermTable, TokenizeMode};

pub const SCHEMA: &str = "placescope/1";
/// Posts needed before a boundary (and hulls) are extracted.
pub const MIN_BOUNDARY_POSTS: usize = 10;
/// Posts needed for any ontology at all (the default radius needs two).
pub const MIN_CORPUS_POSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureCategory {
    Polyline,
    NonPolyline,
}

impl FeatureCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureCategory::Polyline => "Polyline",
            FeatureCategory::NonPolyline => "NonPolyline",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_lowercase()
            .replace(['-', '_', ' '], "")
            .as_str()
        {
            "polyline" => Ok(FeatureCategory::Polyline),
            "nonpolyline" => Ok(FeatureCategory::NonPolyline),
            other => Err(Error::Config(format!("unknown feature category `{other}`"))),
        }
    }
}

impl fmt::Display for FeatureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Study-area settings: extent, polyline radius threshold and raster resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionProfile {
    pub name: String,
    pub bbox: GeoBBox,
    pub polyline_threshold: f64,
    pub default_cell_size: f64,
}

impl RegionProfile {
    pub fn new(
        name: impl Into<String>,
        bbox: GeoBBox,
        polyline_threshold: f64,
        default_cell_size: f64,
    ) -> Result<Self> {
        let r = Self {
            name: name.into(),
            bbox,
            polyline_threshold,
            default_cell_size,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if !(self.polyline_threshold.is_finite() && self.polyline_threshold > 0.0) {
            return Err(Error::param(
                "polyline_threshold",
                format!("{} is not > 0", self.polyline_threshold),
            ));
        }
        if !(self.default_cell_size.is_finite() && self.default_cell_size > 0.0) {
            return Err(Error::param(
                "cell_size",
                format!("{} is not > 0", self.default_cell_size),
            ));
        }
        Ok(())
    }

    /// San Diego County, Twitter density: lines above 10 km.
    pub fn san_diego() -> Self {
        Self {
            name: "san-diego".into(),
            bbox: GeoBBox {
                min_lon: -117.6,
                min_lat: 32.5,
                max_lon: -116.08,
                max_lat: 33.51,
            },
            polyline_threshold: 10_000.0,
            default_cell_size: DEFAULT_CELL_SIZE,
        }
    }

    /// Beijing, Weibo density: lines above 1 km.
    pub fn beijing() -> Self {
        Self {
            name: "beijing".into(),
            bbox: GeoBBox {
                min_lon: 115.4,
                min_lat: 39.4,
                max_lon: 117.5,
                max_lat: 41.1,
            },
            polyline_threshold: 1_000.0,
            default_cell_size: DEFAULT_CELL_SIZE,
        }
    }

    /// Projection centered on the box and the raster grid covering it.
    pub fn frame(&self, cell_size: f64) -> Result<(Projection, GridGeometry)> {
        let projection = Projection::for_bbox(&self.bbox).at(Stage::Project)?;
        let extent = projection.project_bbox(&self.bbox).at(Stage::Project)?;
        let grid = *make_grid(&extent, cell_size).at(Stage::Grid)?.geometry();
        Ok((projection, grid))
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.trim().to_lowercase().replace(['_', ' '], "-").as_str() {
            "san-diego" | "sandiego" | "sd" => Ok(Self::san_diego()),
            "beijing" | "bj" => Ok(Self::beijing()),
            other => Err(Error::Config(format!(
                "unknown region `{other}` (expected san-diego or beijing)"
            ))),
        }
    }
}

/// Polyline when the default radius exceeds the region threshold.
pub fn classify_feature(default_radius: f64, region: &RegionProfile) -> Result<FeatureCategory> {
    classify_radius(default_radius, region.polyline_threshold)
}

pub fn classify_radius(default_radius: f64, threshold: f64) -> Result<FeatureCategory> {
    if !(default_radius.is_finite() && default_radius > 0.0) {
        return Err(Error::param(
            "default_radius",
            format!("{default_radius} is not > 0"),
        ));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::param(
            "polyline_threshold",
            format!("{threshold} is not > 0"),
        ));
    }
    Ok(if default_radius > threshold {
        FeatureCategory::Polyline
    } else {
        FeatureCategory::NonPolyline
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OntologyConfig {
    /// Overrides the region's cell size.
    pub cell_size: Option<f64>,
    /// Overrides the data-driven radius everywhere, seasons included.
    pub radius: Option<f64>,
    pub min_boundary_posts: usize,
    pub hull_min_pts: usize,
    /// Single-eps DBSCAN for the hull cluster; DMDBSCAN when absent.
    pub hull_eps: Option<f64>,
    pub concave_k: usize,
    pub top_k: usize,
    pub stopwords: Vec<String>,
    pub tokenize: TokenizeMode,
    pub seasonal_mode: ChangeMode,
}

impl Default for OntologyConfig {
    fn default() -> Self {
        Self {
            cell_size: None,
            radius: None,
            min_boundary_posts: MIN_BOUNDARY_POSTS,
            hull_min_pts: 4,
            hull_eps: None,
            concave_k: 3,
            top_k: 20,
            stopwords: Vec::new(),
            tokenize: TokenizeMode::Latin,
            seasonal_mode: ChangeMode::Normalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermTables {
    pub full: TermTable,
    pub in_circle: TermTable,
    pub out_circle: TermTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceOntology {
    pub query: PlaceQuery,
    pub region: RegionProfile,
    pub projection: Projection,
    pub grid: GridGeometry,
    pub feature_category: FeatureCategory,
    pub default_radius: f64,
    /// Radius shared by every seasonal pair.
    pub seasonal_radius: Option<f64>,
    /// Normalized differential raster, present with the boundary.
    pub differential: Option<Raster>,
    pub boundary: Option<BoundarySet>,
    pub hull_convex: Option<Hull>,
    pub hull_concave: Option<Hull>,
    pub term_tables: TermTables,
    pub seasonal_changes: Vec<SeasonalChange>,
    pub post_count: usize,
}

/// Planar points per season, years pooled.
pub fn season_points(
    posts: &[GeoPost],
    projection: &Projection,
) -> Result<BTreeMap<Season, Vec<PlanarPoint>>> {
    slice_by_season(posts)
        .into_iter()
        .map(|(s, v)| Ok((s, projection.project_posts(&v)?)))
        .collect()
}

/// Radius shared by all seasons: the default radius of the spring keyword posts,
/// or `fallback` when spring has fewer than two of them.
pub fn seasonal_radius(
    keyword_by_season: &BTreeMap<Season, Vec<PlanarPoint>>,
    cell_size: f64,
    fallback: f64,
) -> Result<f64> {
    match keyword_by_season.get(&Season::Spring) {
        Some(spring) if spring.len() >= 2 => KdeConfig {
            cell_size,
            search_radius: SearchRadius::Auto,
        }
        .resolve_radius(spring),
        _ => {
            log::warn!("spring has fewer than 2 keyword posts; seasonal changes use {fallback} m");
            Ok(fallback)
        }
    }
}

fn build_hulls(points: &[PlanarPoint], config: &OntologyConfig) -> Result<(Hull, Hull)> {
    let clusters = match config.hull_eps {
        Some(eps) => dbscan(points, eps, config.hull_min_pts),
        None => dmdbscan(points, config.hull_min_pts),
    }
    .at(Stage::Cluster)?;
    let members = largest_cluster(&clusters, points).at(Stage::Cluster)?;
    let convex = convex_hull(&members).at(Stage::Hull)?;
    let concave = concave_hull(&members, config.concave_k).at(Stage::Hull)?;
    Ok((convex, concave))
}

/// Runs the whole pipeline for one place. `corpus` holds the posts naming the place
/// and `all_posts` the noise-filtered background they were drawn from.
pub fn build_place_ontology(
    query: &PlaceQuery,
    corpus: &[GeoPost],
    all_posts: &[GeoPost],
    region: &RegionProfile,
    config: &OntologyConfig,
) -> Result<PlaceOntology> {
    if corpus.len() < MIN_CORPUS_POSTS {
        return Err(Error::DegenerateInput(format!(
            "corpus has {} post(s), at least {MIN_CORPUS_POSTS} are needed",
            corpus.len()
        )))
        .at(Stage::Ingest);
    }
    region.validate().at(Stage::Project)?;
    let cell_size = config.cell_size.unwrap_or(region.default_cell_size);
    let (projection, grid) = region.frame(cell_size)?;
    let kw_pts = projection.project_posts(corpus).at(Stage::Project)?;
    let all_pts = projection.project_posts(all_posts).at(Stage::Project)?;

    let kde_config = KdeConfig {
        cell_size,
        search_radius: config
            .radius
            .map_or(SearchRadius::Auto, SearchRadius::Fixed),
    };
    let default_radius = kde_config.resolve_radius(&kw_pts).at(Stage::Radius)?;
    let feature_category = classify_feature(default_radius, region).at(Stage::Classify)?;

    let (differential, boundary) = if corpus.len() >= config.min_boundary_posts {
        let (kw_r, all_r) = rayon::join(
            || kde(&kw_pts, &grid, default_radius),
            || kde(&all_pts, &grid, default_radius),
        );
        let diff =
            normalize_diff(&kw_r.at(Stage::Kde)?, &all_r.at(Stage::Kde)?).at(Stage::Normalize)?;
        let bset = contour(&diff, 0.0);
        (Some(diff), Some(bset))
    } else {
        log::info!(
            "{} posts is below the boundary minimum of {}; skipping boundary and hulls",
            corpus.len(),
            config.min_boundary_posts
        );
        (None, None)
    };

    let (hull_convex, hull_concave) = match (&boundary, feature_category) {
        (Some(_), FeatureCategory::NonPolyline) => match build_hulls(&kw_pts, config) {
            Ok((c, k)) => (Some(c), Some(k)),
            Err(e) => {
                log::warn!("no hulls: {e}");
                (None, None)
            }
        },
        _ => (None, None),
    };

    let empty = BoundarySet::empty(0.0, Some(grid));
    let (inside, outside) =
        split_corpus(all_posts, boundary.as_ref().unwrap_or(&empty), &projection)
            .at(Stage::Split)?;
    let stopwords: HashSet<String> = config.stopwords.iter().map(|s| s.to_lowercase()).collect();
    let table = |posts: &[GeoPost], scope| {
        term_table(
            posts,
            query,
            &stopwords,
            config.top_k,
            scope,
            config.tokenize,
        )
    };
    let (full, (in_circle, out_circle)) = rayon::join(
        || table(all_posts, TableScope::Full),
        || {
            rayon::join(
                || table(&inside, TableScope::InCircle),
                || table(&outside, TableScope::OutCircle),
            )
        },
    );
    let term_tables = TermTables {
        full: full.at(Stage::Semantic)?,
        in_circle: in_circle.at(Stage::Semantic)?,
        out_circle: out_circle.at(Stage::Semantic)?,
    };

    let kw_seasons = season_points(corpus, &projection).at(Stage::Temporal)?;
    let all_seasons = season_points(all_posts, &projection).at(Stage::Temporal)?;
    let has = |m: &BTreeMap<Season, Vec<PlanarPoint>>, s: Season| {
        m.get(&s).is_some_and(|v| !v.is_empty())
    };
    let pairs: Vec<(Season, Season)> = Season::ALL
        .iter()
        .map(|&s| (s, s.next()))
        .filter(|&(a, b)| {
            has(&kw_seasons, a)
                && has(&kw_seasons, b)
                && has(&all_seasons, a)
                && has(&all_seasons, b)
        })
        .collect();
    let seasonal_radius = if pairs.is_empty() {
        None
    } else {
        Some(match config.radius {
            Some(r) => r,
            None => seasonal_radius(&kw_seasons, cell_size, default_radius).at(Stage::Temporal)?,
        })
    };
    let mut seasonal_changes = Vec::with_capacity(pairs.len());
    if let Some(radius) = seasonal_radius {
        for (a, b) in pairs {
            seasonal_changes.push(
                seasonal_change(
                    &kw_seasons,
                    &all_seasons,
                    a,
                    b,
                    config.seasonal_mode,
                    &grid,
                    radius,
                )
                .at(Stage::Temporal)?,
            );
        }
    }

    Ok(PlaceOntology {
        query: query.clone(),
        region: region.clone(),
        projection,
        grid,
        feature_category,
        default_radius,
        seasonal_radius,
        differential,
        boundary,
        hull_convex,
        hull_concave,
        term_tables,
        seasonal_changes,
        post_count: corpus.len(),
    })
}

fn geojson_value(text: String) -> Value {
    serde_json::from_str(&text).expect("writer emits valid JSON")
}

fn mode_str(mode: ChangeMode) -> &'static str {
    match mode {
        ChangeMode::Absolute => "absolute",
        ChangeMode::Normalized => "normalized",
    }
}

impl PlaceOntology {
    /// Rasters that accompany the JSON record, keyed by the names used in `to_json`.
    pub fn raster_artifacts(&self) -> Vec<(String, &Raster)> {
        let mut out = Vec::new();
        if let Some(d) = &self.differential {
            out.push(("differential".to_string(), d));
        }
        for c in &self.seasonal_changes {
            out.push((format!("{}-{}", c.from_season, c.to_season), &c.raster));
        }
        out
    }

    /// Pretty-printed JSON record with a trailing newline.
    pub fn to_json_string(&self, raster_refs: &BTreeMap<String, String>) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json(raster_refs))
            .expect("JSON values always serialize");
        s.push('\n');
        s
    }

    /// JSON record; `raster_refs` maps artifact keys to the file names they were written to.
    pub fn to_json(&self, raster_refs: &BTreeMap<String, String>) -> Value {
        let rref = |key: &str| raster_refs.get(key).map_or(Value::Null, |f| json!(f));
        let table = |t: &TermTable| {
            json!({
                "scope": t.scope.as_str(),
                "k": t.k,
                "rows": t.rows.iter().map(|r| json!({"term": r.term, "pmi": r.pmi, "frequency": r.frequency})).collect::<Vec<_>>(),
            })
        };
        let seasonal: Vec<Value> = self
            .seasonal_changes
            .iter()
            .map(|c| {
                let key = format!("{}-{}", c.from_season, c.to_season);
                json!({
                    "from": c.from_season.as_str(),
                    "to": c.to_season.as_str(),
                    "mode": mode_str(c.mode),
                    "min": c.raster.min_value(),
                    "max": c.raster.max_value(),
                    "raster": rref(&key),
                })
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("schema".into(), json!(SCHEMA));
        doc.insert(
            "query".into(),
            json!({"canonical_name": self.query.canonical_name, "aliases": self.query.aliases}),
        );
        doc.insert(
            "region".into(),
            json!({
                "name": self.region.name,
                "bbox": [self.region.bbox.min_lon, self.region.bbox.min_lat, self.region.bbox.max_lon, self.region.bbox.max_lat],
                "polyline_threshold_m": self.region.polyline_threshold,
            }),
        );
        doc.insert(
            "projection".into(),
            json!({"origin_lon": self.projection.origin_lon, "origin_lat": self.projection.origin_lat}),
        );
        doc.insert(
            "grid".into(),
            json!({
                "origin_x": self.grid.origin_x,
                "origin_y": self.grid.origin_y,
                "cell_size": self.grid.cell_size,
                "n_cols": self.grid.n_cols,
                "n_rows": self.grid.n_rows,
            }),
        );
        doc.insert("post_count".into(), json!(self.post_count));
        doc.insert(
            "feature_category".into(),
            json!(self.feature_category.as_str()),
        );
        doc.insert("default_radius_m".into(), json!(self.default_radius));
        doc.insert("seasonal_radius_m".into(), json!(self.seasonal_radius));
        doc.insert(
            "boundary".into(),
            self.boundary.as_ref().map_or(Value::Null, |b| {
                geojson_value(b.to_geojson(&self.projection))
            }),
        );
        doc.insert(
            "boundary_area_m2".into(),
            self.boundary
                .as_ref()
                .map_or(Value::Null, |b| json!(b.area())),
        );
        doc.insert(
            "hull_convex".into(),
            self.hull_convex.as_ref().map_or(Value::Null, |h| {
                geojson_value(h.to_geojson(&self.projection))
            }),
        );
        doc.insert(
            "hull_concave".into(),
            self.hull_concave.as_ref().map_or(Value::Null, |h| {
                geojson_value(h.to_geojson(&self.projection))
            }),
        );
        doc.insert(
            "term_tables".into(),
            json!({
                "full": table(&self.term_tables.full),
                "in": table(&self.term_tables.in_circle),
                "out": table(&self.term_tables.out_circle),
            }),
        );
        doc.insert("seasonal_changes".into(), Value::Array(seasonal));
        doc.insert(
            "rasters".into(),
            json!({"differential": rref("differential")}),
        );
        Value::Object(doc)
    }
}
