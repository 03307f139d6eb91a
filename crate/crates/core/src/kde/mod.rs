//! Planar projection, quartic-kernel density rasters, and max-normalized differencing.

mod esri;
mod raster;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use esri::{format_sig, read_ascii_grid, read_binary, write_ascii_grid, write_binary, NODATA};
pub use raster::{make_grid, GridGeometry, Raster};

use crate::error::{Error, Result};
pub use crate::geom::PlanarPoint;
use crate::ingest::{valid_lat, valid_lon, GeoBBox, GeoPost, Season};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;
/// Largest study-area span, in degrees, the local projection accepts.
pub const MAX_SPAN_DEG: f64 = 5.0;
pub const DEFAULT_CELL_SIZE: f64 = 100.0;

/// Local equirectangular projection about a fixed origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub origin_lon: f64,
    pub origin_lat: f64,
}

impl Projection {
    pub fn new(origin_lon: f64, origin_lat: f64) -> Result<Self> {
        if !valid_lon(origin_lon) || !valid_lat(origin_lat) || origin_lat.abs() > 85.0 {
            return Err(Error::CoordinateOutOfRange {
                lon: origin_lon,
                lat: origin_lat,
            });
        }
        Ok(Self {
            origin_lon,
            origin_lat,
        })
    }

    /// Projection centered on a study area, which must span at most [`MAX_SPAN_DEG`].
    pub fn for_bbox(bbox: &GeoBBox) -> Result<Self> {
        bbox.validate()?;
        let span = (bbox.max_lon - bbox.min_lon).max(bbox.max_lat - bbox.min_lat);
        if span > MAX_SPAN_DEG {
            return Err(Error::StudyAreaTooLarge {
                span,
                limit: MAX_SPAN_DEG,
            });
        }
        let (lon, lat) = bbox.center();
        Self::new(lon, lat)
    }

    pub fn project(&self, lon: f64, lat: f64) -> Result<PlanarPoint> {
        if !valid_lon(lon) || !valid_lat(lat) {
            return Err(Error::CoordinateOutOfRange { lon, lat });
        }
        let span = (lon - self.origin_lon)
            .abs()
            .max((lat - self.origin_lat).abs());
        if span > MAX_SPAN_DEG {
            return Err(Error::StudyAreaTooLarge {
                span,
                limit: MAX_SPAN_DEG,
            });
        }
        let x = EARTH_RADIUS_M
            * (lon - self.origin_lon).to_radians()
            * self.origin_lat.to_radians().cos();
        let y = EARTH_RADIUS_M * (lat - self.origin_lat).to_radians();
        Ok(PlanarPoint::new(x, y))
    }

    /// Inverse of [`Projection::project`], returning `(lon, lat)`.
    pub fn unproject(&self, p: &PlanarPoint) -> (f64, f64) {
        let lon = self.origin_lon
            + (p.x / (EARTH_RADIUS_M * self.origin_lat.to_radians().cos())).to_degrees();
        let lat = self.origin_lat + (p.y / EARTH_RADIUS_M).to_degrees();
        (lon, lat)
    }

    pub fn project_posts(&self, posts: &[GeoPost]) -> Result<Vec<PlanarPoint>> {
        posts.iter().map(|p| self.project(p.lon, p.lat)).collect()
    }

    /// Planar extent of a lon/lat rectangle under this projection.
    pub fn project_bbox(&self, bbox: &GeoBBox) -> Result<crate::geom::PlanarBBox> {
        let lo = self.project(bbox.min_lon, bbox.min_lat)?;
        let hi = self.project(bbox.max_lon, bbox.max_lat)?;
        crate::geom::PlanarBBox::new(lo.x, lo.y, hi.x, hi.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SearchRadius {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeConfig {
    pub cell_size: f64,
    pub search_radius: SearchRadius,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self {
            cell_size: DEFAULT_CELL_SIZE,
            search_radius: SearchRadius::Auto,
        }
    }
}

impl KdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::param(
                "cell_size",
                format!("{} is not > 0", self.cell_size),
            ));
        }
        if let SearchRadius::Fixed(r) = self.search_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param("search_radius", format!("{r} is not > 0")));
            }
        }
        Ok(())
    }

    /// Radius to use for `points`: the fixed value, or the data-driven default.
    /// A zero default (most points stacked on the mean center) falls back to one cell.
    pub fn resolve_radius(&self, points: &[PlanarPoint]) -> Result<f64> {
        self.validate()?;
        match self.search_radius {
            SearchRadius::Fixed(r) => Ok(r),
            SearchRadius::Auto => {
                let r = default_search_radius(points)?;
                if r > 0.0 {
                    Ok(r)
                } else {
                    log::warn!(
                        "default search radius is 0; falling back to one cell ({} m)",
                        self.cell_size
                    );
                    Ok(self.cell_size)
                }
            }
        }
    }
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Data-driven bandwidth: `0.9 * min(SD, sqrt(1/ln 2) * Dm) * n^-0.2`, where SD is the
/// standard distance and Dm the median distance to the mean center.
pub fn default_search_radius(points: &[PlanarPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "default radius needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput("non-finite point".into()));
    }
    let n = points.len() as f64;
    let mean = PlanarPoint::new(
        points.iter().map(|p| p.x).sum::<f64>() / n,
        points.iter().map(|p| p.y).sum::<f64>() / n,
    );
    let mut dists: Vec<f64> = points.iter().map(|p| p.dist(&mean)).collect();
    let standard_distance = (points.iter().map(|p| p.dist2(&mean)).sum::<f64>() / n).sqrt();
    if standard_distance == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let median_distance = median_of(&mut dists);
    let spread = standard_distance.min((1.0 / std::f64::consts::LN_2).sqrt() * median_distance);
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Quartic kernel weight for squared distance `d2` at bandwidth `radius`.
pub fn quartic(d2: f64, radius: f64) -> f64 {
    let r2 = radius * radius;
    if d2 >= r2 {
        return 0.0;
    }
    let u = 1.0 - d2 / r2;
    3.0 / (PI * r2) * u * u
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Quartic-kernel density at every cell center of `grid`.
///
/// Each cell accumulates its contributions in input point order, so the result is
/// independent of how rows are spread across threads.
pub fn kde(points: &[PlanarPoint], grid: &GridGeometry, radius: f64) -> Result<Raster> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param("radius", format!("{radius} is not > 0")));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput(format!("point {i} is not finite")));
    }
    let g = *grid;
    let cs = g.cell_size;

    // Candidate points per row, in input order.
    let mut by_row: Vec<Vec<u32>> = vec![Vec::new(); g.n_rows];
    for (i, p) in points.iter().enumerate() {
        let lo = ((p.y - radius - g.origin_y) / cs - 0.5).floor() - 1.0;
        let hi = ((p.y + radius - g.origin_y) / cs - 0.5).ceil() + 1.0;
        if hi < 0.0 || lo >= g.n_rows as f64 {
            continue;
        }
        let lo = lo.max(0.0) as usize;
        let hi = (hi.min(g.n_rows as f64 - 1.0)) as usize;
        for row in by_row.iter_mut().take(hi + 1).skip(lo) {
            row.push(i as u32);
        }
    }

    let r2 = radius * radius;
    let scale = 3.0 / (PI * r2);
    let mut values = vec![0.0; g.len()];
    values
        .par_chunks_mut(g.n_cols)
        .enumerate()
        .for_each(|(row, out)| {
            let cy = g.origin_y + (row as f64 + 0.5) * cs;
            let mut acc = vec![Accumulator::default(); g.n_cols];
            for &i in &by_row[row] {
                let p = points[i as usize];
                let dy = cy - p.y;
                if dy * dy >= r2 {
                    continue;
                }
                let lo = ((p.x - radius - g.origin_x) / cs - 0.5).floor() - 1.0;
                let hi = ((p.x + radius - g.origin_x) / cs - 0.5).ceil() + 1.0;
                if hi < 0.0 || lo >= g.n_cols as f64 {
                    continue;
                }
                let lo = lo.max(0.0) as usize;
                let hi = (hi.min(g.n_cols as f64 - 1.0)) as usize;
                for (col, cell) in acc.iter_mut().enumerate().take(hi + 1).skip(lo) {
                    let cx = g.origin_x + (col as f64 + 0.5) * cs;
                    let dx = cx - p.x;
                    let d2 = dx * dx + dy * dy;
                    if d2 < r2 {
                        let u = 1.0 - d2 / r2;
                        cell.add(scale * u * u);
                    }
                }
            }
            for (o, a) in out.iter_mut().zip(&acc) {
                *o = a.value();
            }
        });
    Raster::from_values(g, values)
}

/// Cell-wise `a / max(a) - b / max(b)`. Positive cells are where `a` dominates.
pub fn normalize_diff(a: &Raster, b: &Raster) -> Result<Raster> {
    a.check_same_geometry(b)?;
    let (ma, mb) = (a.max_value(), b.max_value());
    if ma.is_nan() || mb.is_nan() || ma <= 0.0 || mb <= 0.0 {
        return Err(Error::ZeroMaximum);
    }
    a.zip_with(b, |x, y| x / ma - y / mb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangeMode {
    Absolute,
    Normalized,
}

impl ChangeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "absolute" => Ok(ChangeMode::Absolute),
            "normalized" | "normalised" => Ok(ChangeMode::Normalized),
            other => Err(Error::Config(format!("unknown change mode `{other}`"))),
        }
    }
}

/// Signed change between two consecutive seasons; positive cells gained.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalChange {
    pub from_season: Season,
    pub to_season: Season,
    pub mode: ChangeMode,
    pub raster: Raster,
}

fn season_points<'a>(
    map: &'a BTreeMap<Season, Vec<PlanarPoint>>,
    season: Season,
    what: &str,
) -> Result<&'a [PlanarPoint]> {
    match map.get(&season) {
        Some(pts) if !pts.is_empty() => Ok(pts),
        Some(_) => Err(Error::MissingSeason(format!(
            "{season} ({what} set is empty)"
        ))),
        None => Err(Error::MissingSeason(format!("{season} ({what})"))),
    }
}

/// Change raster from `from` to `to` at a fixed `radius` shared by both seasons.
#[allow(clippy::too_many_arguments)]
pub fn seasonal_change(
    keyword_by_season: &BTreeMap<Season, Vec<PlanarPoint>>,
    all_by_season: &BTreeMap<Season, Vec<PlanarPoint>>,
    from: Season,
    to: Season,
    mode: ChangeMode,
    grid: &GridGeometry,
    radius: f64,
) -> Result<SeasonalChange> {
    if from.next() != to {
        return Err(Error::NonConsecutiveSeasons {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    let kw_from = season_points(keyword_by_season, from, "keyword")?;
    let kw_to = season_points(keyword_by_season, to, "keyword")?;
    let raster = match mode {
        ChangeMode::Absolute => kde(kw_to, grid, radius)?.subtract(&kde(kw_from, grid, radius)?)?,
        ChangeMode::Normalized => {
            let all_from = season_points(all_by_season, from, "all-posts")?;
            let all_to = season_points(all_by_season, to, "all-posts")?;
            let after = normalize_diff(&kde(kw_to, grid, radius)?, &kde(all_to, grid, radius)?)?;
            let before =
                normalize_diff(&kde(kw_from, grid, radius)?, &kde(all_from, grid, radius)?)?;
            after.subtract(&before)?
        }
    };
    Ok(SeasonalChange {
        from_season: from,
        to_season: to,
        mode,
        raster,
    })
}
