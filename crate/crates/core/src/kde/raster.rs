use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PlanarBBox, PlanarPoint};

/// Placement and shape of a regular grid. Row 0 is the southernmost row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
}

impl GridGeometry {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        cell_size: f64,
        n_cols: usize,
        n_rows: usize,
    ) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::param("cell_size", format!("{cell_size} is not > 0")));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::param("origin", "not finite"));
        }
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::param(
                "shape",
                format!("{n_cols}x{n_rows} grid is empty"),
            ));
        }
        Ok(Self {
            origin_x,
            origin_y,
            cell_size,
            n_cols,
            n_rows,
        })
    }

    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.n_cols + col
    }

    pub fn cell_center(&self, col: usize, row: usize) -> PlanarPoint {
        PlanarPoint::new(
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell containing `p`, if inside the extent.
    pub fn cell_of(&self, p: &PlanarPoint) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin_x) / self.cell_size).floor();
        let r = ((p.y - self.origin_y) / self.cell_size).floor();
        if c < 0.0 || r < 0.0 || c >= self.n_cols as f64 || r >= self.n_rows as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }

    pub fn extent(&self) -> PlanarBBox {
        PlanarBBox {
            min_x: self.origin_x,
            min_y: self.origin_y,
            max_x: self.origin_x + self.n_cols as f64 * self.cell_size,
            max_y: self.origin_y + self.n_rows as f64 * self.cell_size,
        }
    }
}

/// A grid of finite values with its cached maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    geometry: GridGeometry,
    values: Vec<f64>,
    max_value: f64,
}

impl Raster {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            values: vec![0.0; geometry.len()],
            max_value: 0.0,
        }
    }

    /// Row-major values, south row first.
    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                geometry.n_cols,
                geometry.n_rows
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "values",
                format!("non-finite value at index {i}"),
            ));
        }
        let max_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            geometry,
            values,
            max_value,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[self.geometry.index(col, row)]
    }

    /// Value of the cell containing `p`.
    pub fn sample(&self, p: &PlanarPoint) -> Option<f64> {
        self.geometry.cell_of(p).map(|(c, r)| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Raster> {
        Raster::from_values(self.geometry, self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn zip_with(&self, other: &Raster, f: impl Fn(f64, f64) -> f64) -> Result<Raster> {
        self.check_same_geometry(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Raster::from_values(self.geometry, values)
    }

    /// Cell-wise `self - other`.
    pub fn subtract(&self, other: &Raster) -> Result<Raster> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn check_same_geometry(&self, other: &Raster) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch(format!(
                "{:?} vs {:?}",
                self.geometry, other.geometry
            )));
        }
        Ok(())
    }
}

/// Zero-filled raster covering `bbox` with square cells.
pub fn make_grid(bbox: &PlanarBBox, cell_size: f64) -> Result<Raster> {
    bbox.validate()?;
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(Error::param("cell_size", format!("{cell_size} is not > 0")));
    }
    let count = |extent: f64| -> usize {
        let ratio = extent / cell_size;
        let nearest = ratio.round();
        // 1000 / 100 must give 10 even if the division lands a hair above.
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            (nearest as usize).max(1)
        } else {
            ratio.ceil() as usize
        }
    };
    let geometry = GridGeometry::new(
        bbox.min_x,
        bbox.min_y,
        cell_size,
        count(bbox.width()),
        count(bbox.height()),
    )?;
    Ok(Raster::zeros(geometry))
}
