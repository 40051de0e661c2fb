//! Normality, unit-root and functional-form checks on a few fixture columns.

use macrosig::stattests::{adf_test, default_max_lag, jarque_bera, reset_ramsey};
use macrosig::synthetic::{synthetic_macro, FIXTURE_SEED};
use nalgebra::DMatrix;

fn main() {
    let m = synthetic_macro(FIXTURE_SEED);
    let col = |name: &str| m.series.iter().find(|s| s.name() == name).unwrap().observed().to_vec();

    println!("{:<12} {:>9} {:>9} {:>9} {:>9}", "series", "JB", "p", "skew", "ex.kurt");
    for name in ["VIX", "GOLD_RET", "SP500_RET", "CPI_YOY"] {
        let jb = jarque_bera(&col(name)).unwrap();
        println!("{name:<12} {:>9.3} {:>9.4} {:>9.3} {:>9.3}", jb.statistic, jb.p_value, jb.skewness, jb.excess_kurtosis);
    }

    println!();
    for name in ["GS10", "UNRATE_CHG", "M2_YOY"] {
        let v = col(name);
        let adf = adf_test(&v, default_max_lag(v.len())).unwrap();
        println!("ADF {name:<10} tau {:>7.3} lag {} stationary at 5%: {}", adf.statistic, adf.chosen_lag, adf.stationary_at_5pct);
    }

    // INDPRO_YOY on PMI and LEI_YOY, testing added powers of the fitted values
    let y = col("INDPRO_YOY");
    let (pmi, lei) = (col("PMI"), col("LEI_YOY"));
    let x = DMatrix::from_fn(y.len(), 2, |i, j| if j == 0 { pmi[i] } else { lei[i] });
    let reset = reset_ramsey(&x, &y, &[2, 3, 5]).unwrap();
    println!();
    for e in &reset.entries {
        println!("RESET power {}: F({}, {}) = {:.3}, p = {:.4}", e.power, e.df_num, e.df_den, e.f_statistic, e.p_value);
    }
}
