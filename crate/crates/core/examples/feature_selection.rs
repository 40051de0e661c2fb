//! Boruta on the bundled panel, then correlation pruning of the confirmed set.

use macrosig::dataset::{align, DateWindow};
use macrosig::featsel::{boruta, prune_correlated, BorutaConfig};
use macrosig::synthetic::{synthetic_macro, FIXTURE_SEED};

fn main() {
    let m = synthetic_macro(FIXTURE_SEED);
    // skip the late starters so no backcast is needed here
    let complete: Vec<_> = m.series.iter().filter(|s| s.missing_head() == 0).cloned().collect();
    let panel = align(&complete, &m.label, DateWindow::new(m.label.start(), m.label.end())).unwrap();

    let report = boruta(&panel, &BorutaConfig { seed: 7, ..BorutaConfig::default() }).unwrap();
    println!("{:<12} {:>9} {:>6} {:>10}", "feature", "decision", "hits", "adj. p");
    for f in &report.features {
        println!("{:<12} {:>9} {:>6} {:>10.2e}", f.name, format!("{:?}", f.decision), f.hit_count, f.p_value);
    }

    let pruning = prune_correlated(&panel, &report.confirmed(), 0.8).unwrap();
    for d in &pruning.dropped {
        println!("dropped {} (r = {:.3} with {})", d.name, d.correlation, d.partner);
    }
    println!("kept: {}", pruning.kept.join(", "));
}
