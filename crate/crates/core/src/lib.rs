//! Place ontology extraction from geo-tagged posts: ingestion and noise filtering,
//! kernel density rasters, contour boundaries, clustering and hulls, term scoring,
//! seasonal change, and synthetic corpora with known ground truth.

pub mod boundary;
pub mod cluster;
pub mod error;
pub mod geom;
pub mod ingest;
pub mod kde;
pub mod ontology;
pub mod semantic;
pub mod synth;

pub use boundary::BoundarySet;
pub use cluster::{ClusterResult, Hull, Label};
pub use error::{Error, Result, Stage};
pub use geom::{PlanarBBox, PlanarPoint};
pub use ingest::{GeoBBox, GeoPost, NoiseReport, PlaceQuery, Platform, Season, SeasonKey};
pub use kde::{GridGeometry, Projection, Raster, SeasonalChange};
pub use ontology::{FeatureCategory, OntologyConfig, PlaceOntology, RegionProfile};
pub use semantic::{TermTable, TokenizeMode};
