use std::collections::{BTreeMap, HashSet};

use placescope_core::boundary::{contour, split_corpus};
use placescope_core::ingest::{filter_noise, query_keyword};
use placescope_core::kde::{kde, read_ascii_grid, read_binary, write_ascii_grid, write_binary};
use placescope_core::ontology::build_place_ontology;
use placescope_core::synth::{gen_blob, gen_polyline, gen_uniform, TruthSpec, VocabTerm};
use placescope_core::{
    FeatureCategory, GeoBBox, GeoPost, GridGeometry, OntologyConfig, PlaceQuery, PlanarPoint,
    Projection, Raster, RegionProfile,
};

const LON: f64 = -117.0;
const LAT: f64 = 32.75;

fn projection() -> Projection {
    Projection::new(LON, LAT).unwrap()
}

fn region() -> RegionProfile {
    let bbox = GeoBBox::new(LON - 0.0535, LAT - 0.045, LON + 0.0535, LAT + 0.045).unwrap();
    RegionProfile::new("study", bbox, 10_000.0, 100.0).unwrap()
}

fn campus(n: usize, seed: u64) -> Vec<GeoPost> {
    let mut spec = TruthSpec::disk(
        "Campus",
        projection(),
        PlanarPoint::new(0.0, 0.0),
        400.0,
        seed,
    );
    spec.vocab = vec![
        VocabTerm {
            term: "library".into(),
            p: 0.5,
        },
        VocabTerm {
            term: "students".into(),
            p: 0.3,
        },
    ];
    gen_blob(&spec, n).unwrap()
}

#[test]
fn noisy_corpus_to_ontology() {
    let region = region();
    let mut raw = campus(400, 11);
    raw.extend(gen_uniform(&region.bbox, 3_000, 12).unwrap());
    // Out-of-area and repeated posts.
    let mut stray = raw[0].clone();
    stray.id = "stray".into();
    stray.lon += 1.0;
    raw.push(stray);
    raw.push(raw[5].clone());

    let (clean, report) = filter_noise(&raw, &region.bbox, &HashSet::new()).unwrap();
    assert_eq!(report.original_count, 3_402);
    assert_eq!(report.noise_count, 2);
    assert_eq!(clean.len(), 3_400);

    let query = PlaceQuery::new("Campus", Vec::<String>::new()).unwrap();
    let matched = query_keyword(&clean, &query);
    assert_eq!(matched.len(), 400);
    let record = build_place_ontology(
        &query,
        &matched,
        &clean,
        &region,
        &OntologyConfig::default(),
    )
    .unwrap();
    assert_eq!(record.feature_category, FeatureCategory::NonPolyline);
    assert_eq!(record.post_count, 400);
    assert!(record.default_radius > 0.0 && record.default_radius < 1_000.0);
    let hull = record.hull_convex.as_ref().expect("blob yields a hull");
    assert!(hull.ring.len() >= 3);

    let full: Vec<&str> = record
        .term_tables
        .full
        .rows
        .iter()
        .map(|r| r.term.as_str())
        .collect();
    assert_eq!(full[..2], ["library", "students"]);
    assert!(record.term_tables.full.rows.iter().all(|r| r.pmi > 0.0));

    // In and out tables partition the keyword posts by the boundary.
    let boundary = record
        .boundary
        .as_ref()
        .expect("enough posts for a boundary");
    let (inside, outside) = split_corpus(&clean, boundary, &record.projection).unwrap();
    assert_eq!(inside.len() + outside.len(), clean.len());
    for (table, part) in [
        (&record.term_tables.in_circle, &inside),
        (&record.term_tables.out_circle, &outside),
    ] {
        let n_xy: u64 = query_keyword(part, &query)
            .iter()
            .filter(|p| p.text.contains("library"))
            .count() as u64;
        let row = table.rows.iter().find(|r| r.term == "library");
        assert_eq!(row.map_or(0, |r| r.frequency), n_xy);
    }

    let refs = BTreeMap::new();
    let doc: serde_json::Value = serde_json::from_str(&record.to_json_string(&refs)).unwrap();
    assert_eq!(doc["feature_category"], "NonPolyline");
    assert_eq!(
        doc["seasonal_changes"].as_array().unwrap().len(),
        record.seasonal_changes.len()
    );
    assert!(!record.seasonal_changes.is_empty());
}

#[test]
fn long_line_is_polyline() {
    let bbox = GeoBBox::new(-118.2, 32.2, -115.8, 33.3).unwrap();
    let region = RegionProfile::new("wide", bbox, 10_000.0, 500.0).unwrap();
    let vertices = vec![
        PlanarPoint::new(-80_000.0, 0.0),
        PlanarPoint::new(80_000.0, 0.0),
    ];
    let spec = TruthSpec::polyline(
        "Highway",
        Projection::new(-117.0, 32.75).unwrap(),
        vertices,
        50.0,
        4,
    );
    let posts = gen_polyline(&spec, 400).unwrap();
    let query = PlaceQuery::new("Highway", Vec::<String>::new()).unwrap();
    let record =
        build_place_ontology(&query, &posts, &posts, &region, &OntologyConfig::default()).unwrap();
    assert_eq!(record.feature_category, FeatureCategory::Polyline);
    assert!(record.hull_convex.is_none() && record.hull_concave.is_none());
}

#[test]
fn raster_files_round_trip() {
    let proj = projection();
    let pts = proj.project_posts(&campus(300, 3)).unwrap();
    let grid = GridGeometry::new(-2_000.0, -2_000.0, 100.0, 40, 40).unwrap();
    let raster = kde(&pts, &grid, 500.0).unwrap();
    assert_eq!(read_binary(&write_binary(&raster)).unwrap(), raster);
    let ascii = read_ascii_grid(&write_ascii_grid(&raster)).unwrap();
    assert_eq!(ascii.geometry(), raster.geometry());
    for (a, b) in ascii.values().iter().zip(raster.values()) {
        assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
    }
}

#[test]
fn boundary_geojson_round_trip() {
    let grid = GridGeometry::new(-1_000.0, -1_000.0, 50.0, 40, 40).unwrap();
    let values: Vec<f64> = (0..grid.n_rows)
        .flat_map(|r| (0..grid.n_cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let p = grid.cell_center(c, r);
            1.0 - p.dist(&PlanarPoint::new(0.0, 0.0)) / 500.0
        })
        .collect();
    let raster = Raster::from_values(grid, values).unwrap();
    let b = contour(&raster, 0.0);
    assert_eq!(b.ring_count(), 1);
    let area = b.area();
    assert!((area - std::f64::consts::PI * 500.0 * 500.0).abs() / area < 0.02);

    let proj = projection();
    let back = placescope_core::BoundarySet::from_geojson(&b.to_geojson(&proj), &proj).unwrap();
    assert!((back.area() - area).abs() / area < 1e-4);
    for p in [
        PlanarPoint::new(0.0, 0.0),
        PlanarPoint::new(450.0, 0.0),
        PlanarPoint::new(0.0, -480.0),
    ] {
        assert!(back.contains(&p));
    }
    assert!(!back.contains(&PlanarPoint::new(520.0, 0.0)));
}
