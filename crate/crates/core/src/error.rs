use std::fmt;

/// Pipeline stage names, used to tag errors raised while building an ontology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Project,
    Radius,
    Classify,
    Grid,
    Kde,
    Normalize,
    Contour,
    Cluster,
    Hull,
    Split,
    Semantic,
    Temporal,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Ingest => "ingest",
            Stage::Project => "project",
            Stage::Radius => "radius",
            Stage::Classify => "classify",
            Stage::Grid => "grid",
            Stage::Kde => "kde",
            Stage::Normalize => "normalize",
            Stage::Contour => "contour",
            Stage::Cluster => "cluster",
            Stage::Hull => "hull",
            Stage::Split => "split",
            Stage::Semantic => "semantic",
            Stage::Temporal => "temporal",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: field `{field}`: {reason}")]
    Parse {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("invalid post: {0}")]
    InvalidPost(String),

    #[error("degenerate bounding box: {0}")]
    DegenerateBbox(String),

    #[error("coordinate out of range: lon {lon}, lat {lat}")]
    CoordinateOutOfRange { lon: f64, lat: f64 },

    #[error("study area spans {span:.3} degrees, limit is {limit} degrees")]
    StudyAreaTooLarge { span: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("raster geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("raster has zero maximum; cannot normalize")]
    ZeroMaximum,

    #[error("no data for season {0}")]
    MissingSeason(String),

    #[error("seasons {from} and {to} are not consecutive")]
    NonConsecutiveSeasons { from: String, to: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("every point is noise; no cluster to select")]
    AllNoise,

    #[error("term and place name never co-occur")]
    NoCooccurrence,

    #[error("malformed raster file: {0}")]
    RasterFormat(String),

    #[error("malformed GeoJSON: {0}")]
    GeoJson(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stage that failed, when the error came out of the ontology pipeline.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| match e {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        })
    }
}
