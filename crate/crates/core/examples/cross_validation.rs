//! Metrics from known confusion counts, then stratified five-fold evaluation of every model family.

use macrosig::eval::{cross_validate, metrics, ConfusionMatrix};
use macrosig::models::{ModelFamily, ModelSpec};
use macrosig::synthetic::logit_panel;

fn main() {
    let reported = [(11, 2, 2, 94), (10, 3, 3, 93), (3, 0, 10, 96), (6, 1, 7, 95), (6, 0, 7, 96), (0, 0, 14, 96)];
    println!("reference matrices (tp fp fn tn) -> accuracy / F1:");
    for (family, (tp, fp, fn_, tn)) in ModelFamily::ALL.iter().zip(reported) {
        let m = metrics(&ConfusionMatrix { tp, fp, fn_, tn }).unwrap();
        println!("  {:<18} {:>6.2} / {:>6.2}", family.display_name(), 100.0 * m.accuracy, 100.0 * m.f1);
    }

    let panel = logit_panel(31, 438, -2.6, &[1.6, -1.1, 0.8], 5);
    println!("\n5-fold CV on a panel with {} positives of {}:", panel.positives(), panel.n_rows());
    for family in ModelFamily::ALL {
        let cv = cross_validate(&ModelSpec::default_for(family), &panel, 5, 31).unwrap();
        println!(
            "  {:<18} accuracy {:.3} +/- {:.3}   F1 {:.3} +/- {:.3}",
            family.display_name(),
            cv.mean.accuracy,
            cv.std.accuracy,
            cv.mean.f1,
            cv.std.f1
        );
    }
}
