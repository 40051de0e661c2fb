//! Elastic-net grid search by cross-validation and the resulting importance ranking.

use macrosig::linmodels::{cv_elastic_net, enet_importance, lambda_max};
use macrosig::models::EnetConfig;
use macrosig::synthetic::logit_panel;

fn main() {
    let panel = logit_panel(4, 600, -0.5, &[1.2, -1.0, 0.7], 9);
    let y = panel.label_f64();
    let grid = EnetConfig::default();
    println!("lasso lambda_max = {:.4}", lambda_max(panel.features(), &y, 1.0));

    let cv = cv_elastic_net(panel.features(), &y, &grid.lambda_grid, &grid.l1_ratio_grid, grid.folds, 4).unwrap();
    println!("best lambda {} with l1_ratio {}", cv.best_lambda, cv.best_l1_ratio);
    let mut grid_rows = cv.grid.clone();
    grid_rows.sort_by(|a, b| a.mean_loss.total_cmp(&b.mean_loss));
    for p in grid_rows.iter().take(5) {
        println!("  lambda {:<6} l1 {:<5} cv mse {:.5} (sd {:.5})", p.lambda, p.l1_ratio, p.mean_loss, p.std_loss);
    }
    println!("importance:");
    for (name, w) in enet_importance(&cv.refit, panel.feature_names()) {
        println!("  {name:<4} {w:.4}");
    }
}
