//! Random forest (with max-features tuning) and gradient boosting on the same panel.

use macrosig::ensembles::{cv_max_features, fit_forest, fit_gbm, tree_importances, CartParams, GbmConfig, MaxFeatures};
use macrosig::synthetic::logit_panel;

fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

fn main() {
    let train = logit_panel(21, 500, -1.0, &[1.8, -1.2, 0.9], 6);
    let test = logit_panel(22, 300, -1.0, &[1.8, -1.2, 0.9], 6);
    let (x, y) = (train.features(), train.label());
    let names = train.feature_names();

    let p = x.ncols();
    let tuned = cv_max_features(x, y, &(1..=p).collect::<Vec<_>>(), &CartParams::forest(), 100, 5, 3).unwrap();
    println!("max_features curve:");
    for (m, loss) in &tuned.curve {
        println!("  m={m:<2} {loss:.5}{}", if *m == tuned.best { "  <- best" } else { "" });
    }
    let params = CartParams { max_features: MaxFeatures::Count(tuned.best), ..CartParams::forest() };
    let forest = fit_forest(x, y, &params, 500, 3).unwrap();
    println!("forest test accuracy {:.3}", accuracy(&forest.classify(test.features()).unwrap(), test.label()));
    for (name, w) in tree_importances(&forest.importances, names).iter().take(4) {
        println!("  {name:<3} {w:.3}");
    }

    let gbm = fit_gbm(x, y, &GbmConfig::default(), 3).unwrap();
    let dev = &gbm.train_deviance;
    println!("boosting: deviance {:.1} -> {:.1} over {} stages", dev[0], dev[dev.len() - 1], dev.len() - 1);
    println!("boosting test accuracy {:.3}", accuracy(&gbm.classify(test.features()).unwrap(), test.label()));
    for (name, w) in tree_importances(&gbm.importances, names).iter().take(4) {
        println!("  {name:<3} {w:.3}");
    }
}
