//! Subcommand adapters.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use placescope_core::boundary::{contour, split_corpus, BoundarySet};
use placescope_core::cluster::{
    concave_hull, convex_hull, dbscan, dmdbscan, largest_cluster, ward_cluster,
};
use placescope_core::ingest::{filter_noise, parse_posts, query_keyword};
use placescope_core::kde::{
    kde, normalize_diff, seasonal_change, ChangeMode, KdeConfig, SearchRadius,
};
use placescope_core::ontology::{
    build_place_ontology, classify_radius, season_points, seasonal_radius, OntologyConfig,
    RegionProfile,
};
use placescope_core::semantic::{parse_stopwords, term_table, TableScope, TokenizeMode};
use placescope_core::synth::{gen_blob, gen_polyline, gen_uniform_with, TruthKind, TruthSpec};
use placescope_core::{GeoBBox, GeoPost, PlaceQuery, PlanarPoint, Projection, Season};

use crate::args::*;
use crate::io::{
    posts_to_jsonl, read_posts, read_raster, read_text, require_file, require_parent, write_atomic,
    write_raster,
};
use crate::{config, CliError};

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Kde(a) => kde_cmd(a),
        Command::Normalize(a) => normalize(a),
        Command::Boundary(a) => boundary(a),
        Command::Classify(a) => classify(a),
        Command::Cluster(a) => cluster(a),
        Command::Temporal(a) => temporal(a),
        Command::Semantic(a) => semantic(a),
        Command::Synth(a) => synth(a),
        Command::Ontology(a) => ontology(a),
    }
}

fn stage(name: &'static str) -> impl Fn(placescope_core::Error) -> CliError {
    move |e| CliError::domain(name, e)
}

fn place_query(name: &str, aliases: &[String]) -> Result<PlaceQuery> {
    PlaceQuery::new(name, aliases.iter().cloned()).map_err(CliError::usage)
}

fn optional_query(name: &Option<String>, aliases: &[String]) -> Result<Option<PlaceQuery>> {
    match name {
        Some(n) => Ok(Some(place_query(n, aliases)?)),
        None if !aliases.is_empty() => Err(CliError::Usage("--alias needs --query".into())),
        None => Ok(None),
    }
}

fn keyword_posts(posts: Vec<GeoPost>, query: &Option<PlaceQuery>) -> Vec<GeoPost> {
    match query {
        Some(q) => query_keyword(&posts, q),
        None => posts,
    }
}

fn read_stopwords(path: &Option<std::path::PathBuf>) -> Result<HashSet<String>> {
    match path {
        Some(p) => Ok(parse_stopwords(&read_text(p)?)),
        None => Ok(HashSet::new()),
    }
}

fn ingest(a: &IngestArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    if let Some(r) = &a.report {
        require_parent(r)?;
    }
    if let Some(b) = &a.blocked_sources {
        require_file(b)?;
    }
    let region = a.region.resolve()?;
    let mut blocked: HashSet<String> = a.block_source.iter().cloned().collect();
    if let Some(path) = &a.blocked_sources {
        for line in read_text(path)?.lines() {
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                blocked.insert(line.to_string());
            }
        }
    }
    let text = read_text(&a.input)?;
    let (posts, malformed) = parse_posts(text.lines(), a.strict).map_err(stage("ingest"))?;
    let (kept, report) = filter_noise(&posts, &region.bbox, &blocked).map_err(stage("ingest"))?;
    let report = report.with_malformed(malformed as u64);
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    write_atomic(&a.output, posts_to_jsonl(&kept).as_bytes())?;
    match &a.report {
        Some(path) => write_atomic(path, report_json.as_bytes())?,
        None => print!("{report_json}"),
    }
    Ok(())
}

fn kde_cmd(a: &KdeArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    let region = a.region.resolve()?;
    let query = optional_query(&a.query, &a.aliases)?;
    let cfg = KdeConfig {
        cell_size: region.default_cell_size,
        search_radius: a.radius.map_or(SearchRadius::Auto, SearchRadius::Fixed),
    };
    cfg.validate().map_err(CliError::usage)?;
    let (projection, grid) = region
        .frame(region.default_cell_size)
        .map_err(stage("project"))?;
    let posts = keyword_posts(read_posts(&a.input)?, &query);
    let points = projection.project_posts(&posts).map_err(stage("project"))?;
    let radius = cfg.resolve_radius(&points).map_err(stage("radius"))?;
    let raster = kde(&points, &grid, radius).map_err(stage("kde"))?;
    write_raster(&a.output, &raster)?;
    println!("radius_m {radius}");
    Ok(())
}

fn normalize(a: &NormalizeArgs) -> Result<()> {
    require_file(&a.keyword)?;
    require_file(&a.all)?;
    require_parent(&a.output)?;
    let keyword = read_raster(&a.keyword)?;
    let all = read_raster(&a.all)?;
    let diff = normalize_diff(&keyword, &all).map_err(stage("normalize"))?;
    write_raster(&a.output, &diff)
}

fn boundary(a: &BoundaryArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    if !a.level.is_finite() {
        return Err(CliError::Usage("--level must be finite".into()));
    }
    let region = a.region.resolve()?;
    let projection = Projection::for_bbox(&region.bbox).map_err(stage("project"))?;
    let raster = read_raster(&a.input)?;
    let bset = contour(&raster, a.level);
    write_atomic(&a.output, bset.to_geojson(&projection).as_bytes())?;
    println!("rings {} area_m2 {}", bset.ring_count(), bset.area());
    Ok(())
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let threshold = match (a.region.threshold, &a.region.region) {
        (Some(t), _) => t,
        (None, Some(name)) => {
            RegionProfile::preset(name)
                .map_err(CliError::usage)?
                .polyline_threshold
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --threshold or --region is required".into(),
            ))
        }
    };
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CliError::Usage(format!(
            "--threshold {threshold} is not > 0"
        )));
    }
    let radius = match (a.radius, &a.input, &a.query) {
        (Some(r), None, None) => r,
        (None, Some(input), Some(name)) => {
            require_file(input)?;
            let region = a.region.resolve()?;
            let query = place_query(name, &a.aliases)?;
            let (projection, _) = region
                .frame(region.default_cell_size)
                .map_err(stage("project"))?;
            let posts = query_keyword(&read_posts(input)?, &query);
            let points = projection.project_posts(&posts).map_err(stage("project"))?;
            KdeConfig {
                cell_size: region.default_cell_size,
                search_radius: SearchRadius::Auto,
            }
            .resolve_radius(&points)
            .map_err(stage("radius"))?
        }
        _ => {
            return Err(CliError::Usage(
                "give either --radius, or --input with --query".into(),
            ))
        }
    };
    if !(radius.is_finite() && radius > 0.0) {
        return Err(CliError::Usage(format!("--radius {radius} is not > 0")));
    }
    let category = classify_radius(radius, threshold).map_err(stage("classify"))?;
    println!("{category}");
    Ok(())
}

fn cluster(a: &ClusterArgs) -> Result<()> {
    require_file(&a.input)?;
    for p in [
        Some(&a.output),
        a.convex_hull.as_ref(),
        a.concave_hull.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        require_parent(p)?;
    }
    let region = a.region.resolve()?;
    let query = optional_query(&a.query, &a.aliases)?;
    let projection = Projection::for_bbox(&region.bbox).map_err(stage("project"))?;
    let posts = keyword_posts(read_posts(&a.input)?, &query);
    let points = projection.project_posts(&posts).map_err(stage("project"))?;
    let result = match a.method {
        MethodArg::Dbscan => {
            let eps = a
                .eps
                .ok_or_else(|| CliError::Usage("dbscan needs --eps".into()))?;
            dbscan(&points, eps, a.min_pts)
        }
        MethodArg::Dmdbscan => dmdbscan(&points, a.min_pts),
        MethodArg::Ward => {
            let k =
                a.k.ok_or_else(|| CliError::Usage("ward needs --k".into()))?;
            ward_cluster(&points, k)
        }
    }
    .map_err(stage("cluster"))?;
    let csv = result.to_csv(&points).map_err(stage("cluster"))?;
    if a.convex_hull.is_some() || a.concave_hull.is_some() {
        let members = largest_cluster(&result, &points).map_err(stage("cluster"))?;
        if let Some(path) = &a.convex_hull {
            let hull = convex_hull(&members).map_err(stage("hull"))?;
            write_atomic(path, hull.to_geojson(&projection).as_bytes())?;
        }
        if let Some(path) = &a.concave_hull {
            let hull = concave_hull(&members, a.concave_k).map_err(stage("hull"))?;
            write_atomic(path, hull.to_geojson(&projection).as_bytes())?;
        }
    }
    write_atomic(&a.output, csv.as_bytes())?;
    println!("clusters {} noise {}", result.k, result.noise_count());
    Ok(())
}

fn temporal(a: &TemporalArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    let region = a.region.resolve()?;
    let query = place_query(&a.query.query, &a.query.aliases)?;
    let from = Season::parse(&a.from).map_err(CliError::usage)?;
    let to = Season::parse(&a.to).map_err(CliError::usage)?;
    let mode = ChangeMode::parse(&a.mode).map_err(CliError::usage)?;
    if let Some(r) = a.radius {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Usage(format!("--radius {r} is not > 0")));
        }
    }
    let (projection, grid) = region
        .frame(region.default_cell_size)
        .map_err(stage("project"))?;
    let all = read_posts(&a.input)?;
    let corpus = query_keyword(&all, &query);
    let kw = season_points(&corpus, &projection).map_err(stage("temporal"))?;
    let everyone = season_points(&all, &projection).map_err(stage("temporal"))?;
    let radius = match a.radius {
        Some(r) => r,
        None => {
            let pts = projection
                .project_posts(&corpus)
                .map_err(stage("project"))?;
            let overall = KdeConfig {
                cell_size: region.default_cell_size,
                search_radius: SearchRadius::Auto,
            }
            .resolve_radius(&pts)
            .map_err(stage("radius"))?;
            seasonal_radius(&kw, region.default_cell_size, overall).map_err(stage("temporal"))?
        }
    };
    let change = seasonal_change(&kw, &everyone, from, to, mode, &grid, radius)
        .map_err(stage("temporal"))?;
    write_raster(&a.output, &change.raster)?;
    println!(
        "radius_m {radius} min {} max {}",
        change.raster.min_value(),
        change.raster.max_value()
    );
    Ok(())
}

fn semantic(a: &SemanticArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    if let Some(s) = &a.stopwords {
        require_file(s)?;
    }
    let query = place_query(&a.query.query, &a.query.aliases)?;
    let mode = TokenizeMode::parse(&a.tokenize).map_err(CliError::usage)?;
    let scope = match a.scope.trim().to_lowercase().as_str() {
        "full" => TableScope::Full,
        "in" | "in-circle" => TableScope::InCircle,
        "out" | "out-circle" => TableScope::OutCircle,
        other => {
            return Err(CliError::Usage(format!(
                "unknown scope `{other}` (full, in, out)"
            )))
        }
    };
    let stopwords = read_stopwords(&a.stopwords)?;
    let posts = read_posts(&a.input)?;
    let selected = match scope {
        TableScope::Full => posts,
        _ => {
            let path = a
                .boundary
                .as_ref()
                .ok_or_else(|| CliError::Usage("in and out scopes need --boundary".into()))?;
            require_file(path)?;
            let region = a.region.resolve()?;
            let projection = Projection::for_bbox(&region.bbox).map_err(stage("project"))?;
            let bset = BoundarySet::from_geojson(&read_text(path)?, &projection)
                .map_err(stage("split"))?;
            let (inside, outside) =
                split_corpus(&posts, &bset, &projection).map_err(stage("split"))?;
            if scope == TableScope::InCircle {
                inside
            } else {
                outside
            }
        }
    };
    let table =
        term_table(&selected, &query, &stopwords, a.k, scope, mode).map_err(stage("semantic"))?;
    let json = a
        .output
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let body = if json {
        table.to_json()
    } else {
        table.to_csv()
    };
    write_atomic(&a.output, body.as_bytes())
}

fn parse_vertices(s: &str) -> Result<Vec<PlanarPoint>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let xy: Vec<f64> = pair
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("vertex `{pair}`: {e}")))?;
            match xy.as_slice() {
                [x, y] => Ok(PlanarPoint::new(*x, *y)),
                _ => Err(CliError::Usage(format!(
                    "vertex `{pair}` needs two numbers"
                ))),
            }
        })
        .collect()
}

fn synth_spec(a: &SynthArgs) -> Result<TruthSpec> {
    let mut spec = match &a.spec {
        Some(path) => {
            require_file(path)?;
            let value = config::read_config(path)?;
            serde_json::from_value::<TruthSpec>(value)
                .map_err(|e| CliError::Usage(format!("spec {}: {e}", path.display())))?
        }
        None => {
            let (Some(lon), Some(lat)) = (a.lon, a.lat) else {
                return Err(CliError::Usage(
                    "synth needs --spec, or --lon and --lat".into(),
                ));
            };
            let projection = Projection::new(lon, lat).map_err(CliError::usage)?;
            match a.kind.trim().to_lowercase().as_str() {
                "disk" => {
                    TruthSpec::disk(&a.place, projection, PlanarPoint::new(0.0, 0.0), a.sigma, 0)
                }
                "polyline" => {
                    let v = a
                        .vertices
                        .as_deref()
                        .ok_or_else(|| CliError::Usage("polyline needs --vertices".into()))?;
                    TruthSpec::polyline(&a.place, projection, parse_vertices(v)?, a.sigma, 0)
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown kind `{other}` (disk, polyline)"
                    )))
                }
            }
        }
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(CliError::usage)?;
    Ok(spec)
}

fn synth(a: &SynthArgs) -> Result<()> {
    require_parent(&a.output)?;
    if let Some(t) = &a.truth {
        require_parent(t)?;
    }
    let spec = synth_spec(a)?;
    let background_bbox = match (&a.background_bbox, a.background) {
        (Some(s), _) => Some(GeoBBox::parse(s).map_err(CliError::usage)?),
        (None, 0) => None,
        (None, _) => {
            return Err(CliError::Usage(
                "--background needs --background-bbox".into(),
            ))
        }
    };
    let mut posts = match spec.kind {
        TruthKind::Disk => gen_blob(&spec, a.n),
        TruthKind::Polyline => gen_polyline(&spec, a.n),
    }
    .map_err(stage("synth"))?;
    if let Some(bbox) = background_bbox {
        posts.extend(
            gen_uniform_with(
                &bbox,
                a.background,
                spec.seed.wrapping_add(1),
                &spec.season_weights,
                spec.year,
            )
            .map_err(stage("synth"))?,
        );
    }
    let projection = spec.projection().map_err(stage("synth"))?;
    write_atomic(&a.output, posts_to_jsonl(&posts).as_bytes())?;
    if let Some(path) = &a.truth {
        write_atomic(path, spec.truth_region().to_geojson(&projection).as_bytes())?;
    }
    println!("posts {}", posts.len());
    Ok(())
}

/// Raster file name for ontology artifact `key` next to `output`.
pub fn artifact_name(output: &Path, key: &str) -> String {
    let stem = output
        .file_stem()
        .map_or_else(|| "ontology".into(), |s| s.to_string_lossy().into_owned());
    format!("{stem}.{key}.asc")
}

fn ontology(a: &OntologyArgs) -> Result<()> {
    require_file(&a.input)?;
    require_parent(&a.output)?;
    if let Some(s) = &a.stopwords {
        require_file(s)?;
    }
    let region = a.region.resolve()?;
    let query = place_query(&a.query.query, &a.query.aliases)?;
    let config = OntologyConfig {
        cell_size: None,
        radius: a.radius,
        hull_min_pts: a.min_pts,
        hull_eps: a.eps,
        concave_k: a.concave_k,
        top_k: a.top_k,
        stopwords: read_stopwords(&a.stopwords)?.into_iter().collect(),
        tokenize: TokenizeMode::parse(&a.tokenize).map_err(CliError::usage)?,
        seasonal_mode: ChangeMode::parse(&a.mode).map_err(CliError::usage)?,
        ..OntologyConfig::default()
    };
    let all = read_posts(&a.input)?;
    let corpus = query_keyword(&all, &query);
    let record =
        build_place_ontology(&query, &corpus, &all, &region, &config).map_err(stage("ontology"))?;

    let dir = match a.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let mut refs = BTreeMap::new();
    for (key, raster) in record.raster_artifacts() {
        let name = artifact_name(&a.output, &key);
        write_raster(&dir.join(&name), raster)?;
        refs.insert(key, name);
    }
    write_atomic(&a.output, record.to_json_string(&refs).as_bytes())?;
    println!(
        "{} {} radius_m {} rings {}",
        query.canonical_name,
        record.feature_category,
        record.default_radius,
        record.boundary.as_ref().map_or(0, |b| b.ring_count())
    );
    Ok(())
}
