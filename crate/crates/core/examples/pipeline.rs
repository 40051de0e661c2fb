//! End-to-end run of the bundled config; artifacts land in the given directory.
//!
//! cargo run --release --example pipeline -- /tmp/macrosig-demo

use macrosig::pipeline::{markdown, run, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "macrosig-out".into());
    let config = PipelineConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/synthetic_macro.toml"))?;
    let report = run(&config, Some(out.as_ref()))?;
    print!("{}", markdown(&report));
    println!("\nartifacts written to {out}");
    Ok(())
}
