//! Maximum-likelihood Probit and Logit on a planted-signal panel.

use macrosig::linmodels::{classify, fit_glm, predict_proba, Family};
use macrosig::synthetic::logit_panel;

fn main() {
    let panel = logit_panel(11, 2000, -1.0, &[1.5, -0.8], 1);
    let x = panel.features();
    for family in [Family::Probit, Family::Logit] {
        let fit = fit_glm(x, panel.label(), family).expect("fit");
        println!("{family:?}: {} Newton steps, log-lik {:.2}, pseudo R2 {:.3}, LLR p {:.2e}", fit.iterations, fit.loglik, fit.pseudo_r2, fit.llr_p_value);
        let names = std::iter::once("const").chain(panel.feature_names().iter().map(String::as_str));
        for (j, name) in names.enumerate() {
            println!("  {name:<6} {:>8.4}  se {:.4}  z {:>7.2}  p {:.4}", fit.coefficients[j], fit.std_errors[j], fit.z_values[j], fit.p_values[j]);
        }
        let hits = classify(&predict_proba(&fit, x).unwrap(), 0.5).iter().zip(panel.label()).filter(|(a, b)| a == b).count();
        println!("  in-sample accuracy {:.3}", hits as f64 / panel.n_rows() as f64);
    }
}
