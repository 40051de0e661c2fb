use std::path::Path;

use macrosig::dataset::load_csv;
use macrosig::pipeline::PipelineConfig;
use macrosig::synthetic::{synthetic_macro, FIXTURE_SEED};

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

#[test]
fn bundled_csv_is_the_seeded_generator_output() {
    let mut buf = Vec::new();
    synthetic_macro(FIXTURE_SEED).write_csv(&mut buf).unwrap();
    let shipped = std::fs::read(root().join("synthetic_macro.csv")).unwrap();
    assert!(buf == shipped, "fixtures/synthetic_macro.csv is stale; rerun the generate_fixture example");
}

#[test]
fn bundled_csv_shape() {
    let series = load_csv(root().join("synthetic_macro.csv"), "date").unwrap();
    assert_eq!(series.len(), 21);
    assert!(series.iter().all(|s| s.len() == 438));
    let label = series.iter().find(|s| s.name() == "Recession").unwrap();
    assert_eq!(label.observed().iter().filter(|&&v| v == 1.0).count(), 40);
}

#[test]
fn bundled_config_validates() {
    let cfg = PipelineConfig::load(root().join("synthetic_macro.toml")).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.features.len(), 19);
    let series = load_csv(cfg.input_path(), &cfg.data.date_column).unwrap();
    let names: Vec<String> = series.iter().map(|s| s.name().to_string()).collect();
    cfg.validate_columns(&names).unwrap();
}
