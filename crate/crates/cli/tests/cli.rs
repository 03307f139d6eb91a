use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use placescope_core::ingest::{parse_posts, query_keyword};
use placescope_core::kde::{kde, write_ascii_grid, KdeConfig, SearchRadius};
use placescope_core::ontology::{build_place_ontology, OntologyConfig, RegionProfile};
use placescope_core::semantic::{term_table, TableScope, TokenizeMode};
use placescope_core::{GeoBBox, PlaceQuery};

const BBOX: &str = "-117.0535,32.705,-116.9465,32.795";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_placescope"));
    c.env_remove("PLACESCOPE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Blob of `Campus` posts over a uniform background.
fn fixture(dir: &Path) -> PathBuf {
    let posts = dir.join("posts.jsonl");
    let out = run(&[
        "synth",
        "--lon=-117.0",
        "--lat=32.75",
        "--place",
        "Campus",
        "--seed",
        "5",
        "--n",
        "600",
        "--background",
        "4000",
        &format!("--background-bbox={BBOX}"),
        "--output",
        path_str(&posts),
        "--truth",
        path_str(&dir.join("truth.geojson")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    posts
}

fn read_posts(path: &Path) -> Vec<placescope_core::GeoPost> {
    let text = std::fs::read_to_string(path).unwrap();
    parse_posts(text.lines(), true).unwrap().0
}

#[test]
fn classify_prints_category() {
    let out = run(&["classify", "--radius", "33525.77", "--threshold", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Polyline");
    let out = run(&["classify", "--radius", "242.1619", "--region", "beijing"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "NonPolyline");
    let out = run(&["classify", "--radius", "1424.168", "--region", "beijing"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Polyline");
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["classify", "--radius", "5", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--radius", "5"]).status.code(), Some(2));
    assert_eq!(
        run(&["classify", "--radius", "5", "--region", "atlantis"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "--threads",
            "0",
            "classify",
            "--radius",
            "5",
            "--threshold",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "kde",
            "--input",
            "/nonexistent/posts.jsonl",
            "--region",
            "san-diego",
            "--output",
            "x.asc"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn threads_from_environment() {
    let out = bin()
        .env("PLACESCOPE_THREADS", "0")
        .args(["classify", "--radius", "5", "--threshold", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .env("PLACESCOPE_THREADS", "3")
        .args(["classify", "--radius", "5", "--threshold", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ontology_writes_schema_record() {
    let dir = tempfile::tempdir().unwrap();
    let posts = fixture(dir.path());
    let output = dir.path().join("campus.json");
    let out = run(&[
        "ontology",
        "--input",
        path_str(&posts),
        "--query",
        "Campus",
        &format!("--bbox={BBOX}"),
        "--output",
        path_str(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc["schema"], "placescope/1");
    assert_eq!(doc["feature_category"], "NonPolyline");
    assert_eq!(doc["post_count"], 600);
    let raster = doc["rasters"]["differential"].as_str().unwrap();
    assert!(dir.path().join(raster).is_file());
    for change in doc["seasonal_changes"].as_array().unwrap() {
        assert!(dir
            .path()
            .join(change["raster"].as_str().unwrap())
            .is_file());
    }

    // The CLI is a thin adapter: the library produces the same bytes.
    let all = read_posts(&posts);
    let query = PlaceQuery::new("Campus", Vec::<String>::new()).unwrap();
    let region =
        RegionProfile::new("custom", GeoBBox::parse(BBOX).unwrap(), 10_000.0, 100.0).unwrap();
    let record = build_place_ontology(
        &query,
        &query_keyword(&all, &query),
        &all,
        &region,
        &OntologyConfig::default(),
    )
    .unwrap();
    let refs: BTreeMap<String, String> = record
        .raster_artifacts()
        .into_iter()
        .map(|(k, _)| (k.clone(), format!("campus.{k}.asc")))
        .collect();
    assert_eq!(
        std::fs::read_to_string(&output).unwrap(),
        record.to_json_string(&refs)
    );
    let diff = record.differential.as_ref().unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join(raster)).unwrap(),
        write_ascii_grid(diff)
    );
}

#[test]
fn kde_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let posts = fixture(dir.path());
    let output = dir.path().join("kw.asc");
    let out = run(&[
        "kde",
        "--input",
        path_str(&posts),
        "--query",
        "Campus",
        &format!("--bbox={BBOX}"),
        "--cell-size",
        "200",
        "--output",
        path_str(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let region =
        RegionProfile::new("custom", GeoBBox::parse(BBOX).unwrap(), 10_000.0, 200.0).unwrap();
    let (projection, grid) = region.frame(200.0).unwrap();
    let query = PlaceQuery::new("Campus", Vec::<String>::new()).unwrap();
    let pts = projection
        .project_posts(&query_keyword(&read_posts(&posts), &query))
        .unwrap();
    let radius = KdeConfig {
        cell_size: 200.0,
        search_radius: SearchRadius::Auto,
    }
    .resolve_radius(&pts)
    .unwrap();
    let expect = write_ascii_grid(&kde(&pts, &grid, radius).unwrap());
    assert_eq!(std::fs::read_to_string(&output).unwrap(), expect);
}

#[test]
fn raster_chain_and_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let posts = fixture(dir.path());
    let d = |name: &str| dir.path().join(name);
    let bbox = format!("--bbox={BBOX}");
    let p = path_str(&posts);
    let kw = d("kw.bin");
    let all = d("all.asc");
    assert!(run(&[
        "kde",
        "--input",
        p,
        "--query",
        "Campus",
        &bbox,
        "--radius",
        "300",
        "--output",
        path_str(&kw)
    ])
    .status
    .success());
    assert!(run(&[
        "kde",
        "--input",
        p,
        &bbox,
        "--radius",
        "300",
        "--output",
        path_str(&all)
    ])
    .status
    .success());
    assert!(std::fs::read(&kw).unwrap().starts_with(b"PSRB"));
    let diff = d("diff.asc");
    let out = run(&[
        "normalize",
        "--keyword",
        path_str(&kw),
        "--all",
        path_str(&all),
        "--output",
        path_str(&diff),
    ]);
    assert!(out.status.success());
    let geo = d("b.geojson");
    let out = run(&[
        "boundary",
        "--input",
        path_str(&diff),
        "--level",
        "0",
        &bbox,
        "--output",
        path_str(&geo),
    ]);
    assert!(out.status.success());
    let fc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&geo).unwrap()).unwrap();
    assert_eq!(fc["type"], "Feature");

    // A raster of zeros cannot be normalized: exit 1, stage named, nothing written.
    let zeros = d("zeros.asc");
    std::fs::write(
        &zeros,
        "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n0 0\n",
    )
    .unwrap();
    let bad = d("bad.asc");
    let out = run(&[
        "normalize",
        "--keyword",
        path_str(&zeros),
        "--all",
        path_str(&all),
        "--output",
        path_str(&bad),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalize stage failed"));
    assert!(!bad.exists());
}

#[test]
fn ontology_failure_names_stage_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let posts = fixture(dir.path());
    let output = dir.path().join("none.json");
    let out = run(&[
        "ontology",
        "--input",
        path_str(&posts),
        "--query",
        "Nowhere",
        &format!("--bbox={BBOX}"),
        "--output",
        path_str(&output),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest stage failed"));
    assert!(!output.exists());
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(
        &spec,
        "kind = \"disk\"\nplace_name = \"Campus\"\norigin_lon = -117.0\norigin_lat = 32.75\nsigma = 400.0\nseed = 3\n\
         center = { x = 0.0, y = 0.0 }\n\
         vocab = [{ term = \"library\", p = 0.6 }, { term = \"students\", p = 0.4 }, { term = \"lunch\", p = 0.2 }, { term = \"exam\", p = 0.3 }]\n",
    )
    .unwrap();
    let posts = dir.path().join("posts.jsonl");
    let out = run(&[
        "synth",
        "--spec",
        path_str(&spec),
        "--n",
        "300",
        "--background",
        "600",
        &format!("--background-bbox={BBOX}"),
        "--output",
        path_str(&posts),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cfg = dir.path().join("run.toml");
    let table = dir.path().join("terms.csv");
    std::fs::write(
        &cfg,
        format!(
            "threads = 2\n[semantic]\ninput = \"{}\"\nquery = \"Campus\"\nk = 3\noutput = \"{}\"\n",
            path_str(&posts),
            path_str(&table)
        ),
    )
    .unwrap();
    let out = run(&["--config", path_str(&cfg), "semantic"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("term,pmi,frequency\n"));
    assert_eq!(text.lines().count(), 4);

    // Command-line flags override the file.
    let out = run(&["semantic", "--config", path_str(&cfg), "--k", "1"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 2);

    let all = read_posts(&posts);
    let query = PlaceQuery::new("Campus", Vec::<String>::new()).unwrap();
    let expect = term_table(
        &all,
        &query,
        &HashSet::new(),
        1,
        TableScope::Full,
        TokenizeMode::Latin,
    )
    .unwrap();
    assert_eq!(text, expect.to_csv());

    let json_cfg = dir.path().join("run.json");
    std::fs::write(
        &json_cfg,
        r#"{"classify": {"radius": 20000, "threshold": 10000}}"#,
    )
    .unwrap();
    let out = run(&["--config", path_str(&json_cfg), "classify"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Polyline");
    std::fs::write(&json_cfg, r#"{"classify": {"bogus": 1}}"#).unwrap();
    assert_eq!(
        run(&["--config", path_str(&json_cfg), "classify"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ingest_cluster_temporal_and_semantic_scopes() {
    let dir = tempfile::tempdir().unwrap();
    let posts = fixture(dir.path());
    let d = |name: &str| dir.path().join(name);
    let bbox = format!("--bbox={BBOX}");

    // Append one malformed line and one duplicate.
    let mut raw = std::fs::read_to_string(&posts).unwrap();
    let first = raw.lines().next().unwrap().to_string();
    raw.push_str("{not json}\n");
    raw.push_str(&first);
    raw.push('\n');
    let raw_path = d("raw.jsonl");
    std::fs::write(&raw_path, raw).unwrap();
    let clean = d("clean.jsonl");
    let report = d("report.json");
    let out = run(&[
        "ingest",
        "--input",
        path_str(&raw_path),
        &bbox,
        "--output",
        path_str(&clean),
        "--report",
        path_str(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["original_count"], 4602);
    assert_eq!(r["noise_count"], 2);
    assert_eq!(r["malformed"], 1);
    assert_eq!(r["duplicate"], 1);
    assert_eq!(read_posts(&clean).len(), 4600);
    let strict = run(&[
        "ingest",
        "--input",
        path_str(&raw_path),
        &bbox,
        "--output",
        path_str(&d("s.jsonl")),
        "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(1));

    let labels = d("labels.csv");
    let hull = d("hull.geojson");
    let out = run(&[
        "cluster",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        &bbox,
        "--method",
        "dbscan",
        "--eps",
        "150",
        "--min-pts",
        "5",
        "--output",
        path_str(&labels),
        "--concave-hull",
        path_str(&hull),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&labels).unwrap();
    assert!(csv.starts_with("point_index,x,y,label\n"));
    assert_eq!(csv.lines().count(), 601);
    assert!(hull.is_file());
    let ward = run(&[
        "cluster",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        &bbox,
        "--method",
        "ward",
        "--output",
        path_str(&labels),
    ]);
    assert_eq!(ward.status.code(), Some(2));

    let change = d("change.asc");
    let out = run(&[
        "temporal",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        &bbox,
        "--from",
        "spring",
        "--to",
        "summer",
        "--output",
        path_str(&change),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bad = run(&[
        "temporal",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        &bbox,
        "--from",
        "spring",
        "--to",
        "fall",
        "--output",
        path_str(&d("bad.asc")),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("temporal stage failed"));

    // In and out tables against the truth disk as a boundary.
    let truth = d("truth.geojson");
    let t_in = d("in.json");
    let out = run(&[
        "semantic",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        "--scope",
        "in",
        "--boundary",
        path_str(&truth),
        &bbox,
        "--output",
        path_str(&t_in),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&t_in).unwrap()).unwrap();
    assert!(rows.is_array());
    let no_boundary = run(&[
        "semantic",
        "--input",
        path_str(&clean),
        "--query",
        "Campus",
        "--scope",
        "out",
        "--output",
        path_str(&d("o.csv")),
    ]);
    assert_eq!(no_boundary.status.code(), Some(2));
}

#[test]
fn synth_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(
        &spec,
        "kind = \"polyline\"\nplace_name = \"Highway\"\norigin_lon = -117.0\norigin_lat = 32.8\nsigma = 30.0\nseed = 9\n\
         vertices = [{ x = -15000.0, y = 0.0 }, { x = 15000.0, y = 0.0 }]\n\
         [season_weights]\nspring = 1.0\nsummer = 0.0\nfall = 0.0\nwinter = 0.0\n",
    )
    .unwrap();
    let out_a = dir.path().join("a.jsonl");
    let out_b = dir.path().join("b.jsonl");
    for out in [&out_a, &out_b] {
        let o = run(&[
            "synth",
            "--spec",
            path_str(&spec),
            "--n",
            "50",
            "--output",
            path_str(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
    let posts = read_posts(&out_a);
    assert_eq!(posts.len(), 50);
    assert!(posts.iter().all(|p| p.text.contains("Highway")));
    let out = run(&[
        "synth",
        "--lon=-117",
        "--lat=32.8",
        "--background",
        "5",
        "--output",
        path_str(&out_a),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
