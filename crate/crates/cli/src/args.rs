//! Command-line grammar.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use placescope_core::ontology::RegionProfile;
use placescope_core::GeoBBox;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "placescope",
    version,
    about = "Place-name ontologies from geo-tagged microblog posts",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads for data-parallel stages (defaults to all cores).
    #[arg(long, global = true, env = "PLACESCOPE_THREADS")]
    pub threads: Option<usize>,

    /// TOML or JSON file whose keys mirror the long flags; a table named after the
    /// subcommand holds that subcommand's flags. Command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and noise-filter raw posts into a clean corpus plus a noise report.
    Ingest(IngestArgs),
    /// Kernel density raster of (optionally keyword-filtered) posts.
    Kde(KdeArgs),
    /// Differential of two rasters, each scaled by its own maximum.
    Normalize(NormalizeArgs),
    /// Contour a raster at a level into GeoJSON polygons.
    Boundary(BoundaryArgs),
    /// Feature category from a search radius.
    Classify(ClassifyArgs),
    /// Cluster keyword posts and optionally hull the largest cluster.
    Cluster(ClusterArgs),
    /// Change raster between two consecutive seasons.
    Temporal(TemporalArgs),
    /// PMI term table for a place name.
    Semantic(SemanticArgs),
    /// Generate a synthetic corpus with known ground truth.
    Synth(SynthArgs),
    /// Full pipeline: boundary, hulls, term tables and seasonal change.
    Ontology(OntologyArgs),
}

impl Command {
    pub const NAMES: [&'static str; 10] = [
        "ingest",
        "kde",
        "normalize",
        "boundary",
        "classify",
        "cluster",
        "temporal",
        "semantic",
        "synth",
        "ontology",
    ];
}

/// Study area: a preset, an inline box, or a preset with overrides.
#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// Region preset: san-diego (lines above 10 km) or beijing (lines above 1 km).
    #[arg(long)]
    pub region: Option<String>,
    /// Study-area box as min_lon,min_lat,max_lon,max_lat.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<String>,
    /// Polyline radius threshold in meters.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Raster cell size in meters.
    #[arg(long)]
    pub cell_size: Option<f64>,
}

impl RegionArgs {
    pub fn resolve(&self) -> Result<RegionProfile, CliError> {
        let base = match &self.region {
            Some(name) => Some(RegionProfile::preset(name).map_err(CliError::usage)?),
            None => None,
        };
        let bbox = match &self.bbox {
            Some(s) => Some(GeoBBox::parse(s).map_err(CliError::usage)?),
            None => None,
        };
        let mut region = match (base, bbox) {
            (Some(mut r), Some(b)) => {
                r.bbox = b;
                r
            }
            (Some(r), None) => r,
            (None, Some(b)) => RegionProfile {
                name: "custom".into(),
                bbox: b,
                polyline_threshold: RegionProfile::san_diego().polyline_threshold,
                default_cell_size: placescope_core::kde::DEFAULT_CELL_SIZE,
            },
            (None, None) => {
                return Err(CliError::Usage(
                    "one of --region or --bbox is required".into(),
                ))
            }
        };
        if let Some(t) = self.threshold {
            region.polyline_threshold = t;
        }
        if let Some(c) = self.cell_size {
            region.default_cell_size = c;
        }
        region.validate().map_err(CliError::usage)?;
        Ok(region)
    }
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    /// Canonical place name.
    #[arg(long)]
    pub query: String,
    /// Alternative spelling; repeatable.
    #[arg(long = "alias")]
    pub aliases: Vec<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Line-delimited JSON posts.
    #[arg(long)]
    pub input: PathBuf,
    /// Clean corpus destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Noise report destination; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Source label to drop; repeatable.
    #[arg(long)]
    pub block_source: Vec<String>,
    /// File of blocked source labels, one per line.
    #[arg(long)]
    pub blocked_sources: Option<PathBuf>,
    /// Fail on the first malformed line instead of counting it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct KdeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Keep only posts naming this place.
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long = "alias")]
    pub aliases: Vec<String>,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Search radius in meters; data-driven default when absent.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Raster destination (.asc for ESRI ASCII, .bin for the binary format).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Keyword raster.
    #[arg(long)]
    pub keyword: PathBuf,
    /// Reference raster, usually all posts.
    #[arg(long)]
    pub all: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Raster to contour.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub level: f64,
    #[command(flatten)]
    pub region: RegionArgs,
    /// GeoJSON destination.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Default search radius in meters.
    #[arg(long, allow_hyphen_values = true)]
    pub radius: Option<f64>,
    /// Posts to derive the radius from, together with --query.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long = "alias")]
    pub aliases: Vec<String>,
    #[command(flatten)]
    pub region: RegionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dbscan,
    Dmdbscan,
    Ward,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long = "alias")]
    pub aliases: Vec<String>,
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Dmdbscan)]
    pub method: MethodArg,
    /// Neighborhood radius in meters (dbscan).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Core threshold, the point itself included (dbscan, dmdbscan).
    #[arg(long, default_value_t = 4)]
    pub min_pts: usize,
    /// Cluster count (ward).
    #[arg(long)]
    pub k: Option<usize>,
    /// Labels CSV destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Convex hull of the largest cluster, as GeoJSON.
    #[arg(long)]
    pub convex_hull: Option<PathBuf>,
    /// Concave hull of the largest cluster, as GeoJSON.
    #[arg(long)]
    pub concave_hull: Option<PathBuf>,
    /// Starting neighbor count for the concave hull.
    #[arg(long, default_value_t = 3)]
    pub concave_k: usize,
}

#[derive(Debug, Args)]
pub struct TemporalArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Earlier season (spring, summer, fall, winter).
    #[arg(long)]
    pub from: String,
    /// Following season.
    #[arg(long)]
    pub to: String,
    /// normalized (scaled by all posts) or absolute.
    #[arg(long, default_value = "normalized")]
    pub mode: String,
    /// Shared radius in meters; the spring default radius when absent.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SemanticArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub query: QueryArgs,
    /// Stopword file, one term per line, '#' comments.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Number of terms.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// full, in or out.
    #[arg(long, default_value = "full")]
    pub scope: String,
    /// Boundary GeoJSON splitting posts for the in and out scopes.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    #[command(flatten)]
    pub region: RegionArgs,
    /// latin or cjk.
    #[arg(long, default_value = "latin")]
    pub tokenize: String,
    /// Table destination (.json for a JSON array, CSV otherwise).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML or JSON generator spec; the flags below build one when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value = "disk")]
    pub kind: String,
    #[arg(long, default_value = "Place")]
    pub place: String,
    /// Projection origin and blob center longitude.
    #[arg(long, allow_hyphen_values = true)]
    pub lon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lat: Option<f64>,
    /// Planar polyline vertices in meters from the origin, as x1,y1;x2,y2;...
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<String>,
    #[arg(long, default_value_t = 400.0)]
    pub sigma: f64,
    /// Overrides the spec seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Place posts to generate.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Uniform background posts to append.
    #[arg(long, default_value_t = 0)]
    pub background: usize,
    /// Background box as min_lon,min_lat,max_lon,max_lat.
    #[arg(long, allow_hyphen_values = true)]
    pub background_bbox: Option<String>,
    /// Corpus destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Truth region GeoJSON destination.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OntologyArgs {
    /// Noise-filtered posts; the place corpus is the subset naming the place.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Radius in meters for every surface, overriding the data-driven ones.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Core threshold for the hull clustering.
    #[arg(long, default_value_t = 4)]
    pub min_pts: usize,
    /// Single-eps DBSCAN for the hull cluster instead of DMDBSCAN.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub concave_k: usize,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value = "latin")]
    pub tokenize: String,
    /// Seasonal change mode: normalized or absolute.
    #[arg(long, default_value = "normalized")]
    pub mode: String,
    /// JSON record destination; rasters are written next to it.
    #[arg(long)]
    pub output: PathBuf,
}
