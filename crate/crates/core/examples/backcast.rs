//! Fill the late-starting VIX column of the bundled panel by reverse-time ARIMA.

use macrosig::arima::{backcast_head_with, Criterion};
use macrosig::synthetic::{synthetic_macro, FIXTURE_SEED};

fn main() {
    let panel = synthetic_macro(FIXTURE_SEED);
    for s in panel.series.iter().filter(|s| s.missing_head() > 0) {
        let b = backcast_head_with(s, 3, 3, Criterion::Aic).expect("backcast");
        let fit = &b.model.as_ref().expect("enough history").model;
        println!("{:<11} {} missing, {} (AIC {:.1}, BIC {:.1})", s.name(), s.missing_head(), fit.order, fit.aic, fit.bic);
        println!("            ar {:?}  ma {:?}", fit.ar, fit.ma);
        let head: Vec<String> = b.filled.iter().take(6).map(|v| format!("{v:.3}")).collect();
        println!("            first fills {}", head.join(" "));
    }
}
