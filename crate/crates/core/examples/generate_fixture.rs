//! Regenerates the bundled synthetic macro panel.
//!
//! cargo run --example generate_fixture -- fixtures/synthetic_macro.csv

use std::fs::File;
use std::io::BufWriter;

use macrosig::synthetic::{synthetic_macro, FIXTURE_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/synthetic_macro.csv".into());
    let fixture = synthetic_macro(FIXTURE_SEED);
    fixture.write_csv(BufWriter::new(File::create(&path)?))?;
    let positives = fixture.label.observed().iter().filter(|&&v| v == 1.0).count();
    println!("wrote {path}: {} months, {} features, {positives} recession months", fixture.label.len(), fixture.series.len());
    Ok(())
}
