//! Train the two-hidden-layer network and verify its gradients numerically.

use macrosig::dataset::Standardizer;
use macrosig::neural::{gradient_check, init, train, MlpConfig};
use macrosig::synthetic::logit_panel;

fn main() {
    let panel = logit_panel(8, 400, -0.5, &[2.0, -1.5], 4);
    let x = Standardizer::fit(panel.features()).transform(panel.features());
    let y = panel.label();

    let model = init(&MlpConfig::default(), x.ncols(), 8).unwrap();
    println!("layers {:?}, {} parameters", model.layer_sizes(), model.n_parameters());
    let head = x.rows(0, 16).into_owned();
    println!("gradient check at init: {:.2e}", gradient_check(&model, &head, &y[..16], 1e-5).unwrap());

    let fit = train(&model, &x, y).unwrap();
    let loss = &fit.loss_history;
    for epoch in [0, 99, 499, 999, loss.len() - 1] {
        println!("  epoch {:>4} loss {:.5}", epoch + 1, loss[epoch]);
    }
    println!("gradient check after training: {:.2e}", gradient_check(&fit, &head, &y[..16], 1e-5).unwrap());
    let pred = fit.classify(&x).unwrap();
    let hits = pred.iter().zip(y).filter(|(a, b)| a == b).count();
    println!("training accuracy {:.3}", hits as f64 / y.len() as f64);
}
