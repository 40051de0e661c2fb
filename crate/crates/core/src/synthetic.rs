//! Seeded data generators: the bundled macro fixture and planted-signal panels.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{write_series_csv, DatasetError, MonthDate, MonthlySeries, Panel};
use crate::sim;

/// Seed that produced `fixtures/synthetic_macro.csv`.
pub const FIXTURE_SEED: u64 = 7;
pub const FIXTURE_MONTHS: usize = 438;

/// Peak-to-trough months, both ends included.
pub const RECESSIONS: [((i32, u32), (i32, u32)); 4] = [((1990, 7), (1991, 3)), ((2001, 3), (2001, 11)), ((2007, 12), (2009, 6)), ((2020, 2), (2020, 4))];

const LEAD_MONTHS: usize = 6;
const INVERSION_MONTHS: usize = 14;

pub fn fixture_start() -> MonthDate {
    MonthDate::new(1986, 1).expect("valid month")
}

/// 0/1 indicator over `n` months from `start`.
pub fn recession_indicator(start: MonthDate, n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for ((py, pm), (ty, tm)) in RECESSIONS {
        let a = MonthDate::new(py, pm).expect("valid month").months_since(&start);
        let b = MonthDate::new(ty, tm).expect("valid month").months_since(&start);
        for i in a.max(0)..=b.min(n as i64 - 1) {
            y[i as usize] = 1.0;
        }
    }
    y
}

/// Indicator of the `len` months before each recession begins.
fn pre_window(y: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    for t in 0..y.len() {
        if y[t] == 1.0 && (t == 0 || y[t - 1] == 0.0) {
            for v in &mut out[t.saturating_sub(len)..t] {
                *v = 1.0;
            }
        }
    }
    out
}

fn ar1(rng: &mut ChaCha8Rng, rho: f64, sd: f64, n: usize) -> Vec<f64> {
    let e = sim::normals(rng, n);
    let mut x = vec![0.0; n];
    let mut prev = e[0] * sd / (1.0 - rho * rho).sqrt();
    for t in 0..n {
        prev = if t == 0 { prev } else { rho * prev + sd * e[t] };
        x[t] = prev;
    }
    x
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

struct Indicator {
    name: &'static str,
    missing_head: usize,
    base: f64,
    loading: f64,
    /// Months by which the series anticipates the stress factor.
    lead: usize,
    noise_sd: f64,
    noise_rho: f64,
}

const fn ind(name: &'static str, missing_head: usize, base: f64, loading: f64, lead: usize, noise_sd: f64, noise_rho: f64) -> Indicator {
    Indicator { name, missing_head, base, loading, lead, noise_sd, noise_rho }
}

const INDICATORS: [Indicator; 17] = [
    ind("UNRATE_CHG", 0, 0.0, 0.35, 0, 0.25, 0.3),
    ind("CLAIMS_YOY", 0, -2.0, 9.0, 0, 8.0, 0.5),
    ind("INDPRO_YOY", 0, 2.5, -2.2, 0, 2.0, 0.6),
    ind("PAYEMS_YOY", 0, 1.6, -1.0, 0, 1.0, 0.7),
    ind("BAA_SPREAD", 0, 2.2, 0.45, 0, 0.4, 0.9),
    ind("VIX", 18, 19.0, 4.5, 0, 5.0, 0.6),
    ind("SP500_RET", 0, 0.8, -1.6, 0, 4.0, 0.0),
    ind("HOUST_YOY", 0, 2.0, -7.0, 3, 10.0, 0.6),
    ind("CONF_YOY", 0, 1.0, -6.0, 2, 9.0, 0.5),
    ind("CPI_YOY", 0, 2.8, 0.0, 0, 0.3, 0.97),
    ind("M2_YOY", 0, 5.5, 0.0, 0, 0.5, 0.95),
    ind("OIL_RET", 0, 0.4, 0.0, 0, 8.0, 0.1),
    ind("USD_RET", 0, 0.0, 0.0, 0, 2.0, 0.1),
    ind("GOLD_RET", 13, 0.5, 0.0, 0, 3.5, 0.0),
    ind("COPPER_RET", 4, 0.3, -1.0, 0, 5.5, 0.1),
    ind("PMI", 0, 52.0, -2.5, 1, 2.5, 0.8),
    ind("RETAIL_YOY", 0, 4.0, -1.8, 0, 2.5, 0.5),
];

/// Raw feature series plus the 0/1 label series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMacro {
    pub series: Vec<MonthlySeries>,
    pub label: MonthlySeries,
}

impl SyntheticMacro {
    /// Date column, the features, then `Recession`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut all = self.series.clone();
        all.push(self.label.clone());
        write_series_csv(writer, "date", &all)
    }
}

/// Twenty monthly indicators over Jan 1986 to Jun 2022 driven by a latent stress factor
/// that rises ahead of and during four recession episodes (40 labelled months).
/// Three price-like series start late, and a yield pair supports a term-spread transform.
pub fn synthetic_macro(seed: u64) -> SyntheticMacro {
    let n = FIXTURE_MONTHS;
    let start = fixture_start();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = recession_indicator(start, n);
    let lead = pre_window(&y, LEAD_MONTHS);
    let inversion = pre_window(&y, INVERSION_MONTHS);
    let base_noise = ar1(&mut rng, 0.85, 0.55, n);
    let stress: Vec<f64> = (0..n).map(|t| base_noise[t] + 1.8 * y[t] + 0.8 * lead[t]).collect();

    let mut series = Vec::with_capacity(20);
    let mut indpro = Vec::new();
    for spec in &INDICATORS {
        let noise = ar1(&mut rng, spec.noise_rho, spec.noise_sd, n);
        let values: Vec<f64> = (0..n).map(|t| round4(spec.base + spec.loading * stress[(t + spec.lead).min(n - 1)] + noise[t])).collect();
        if spec.name == "INDPRO_YOY" {
            indpro = values.clone();
        }
        series.push(MonthlySeries::with_missing_head(spec.name, start, spec.missing_head, values[spec.missing_head..].to_vec()));
    }
    let lei_noise = sim::normals(&mut rng, n);
    let lei: Vec<f64> = (0..n).map(|t| round4(1.0 + 0.9 * (indpro[t] - 2.5) + 0.6 * lei_noise[t])).collect();
    series.push(MonthlySeries::complete("LEI_YOY", start, lei));

    let level_noise = ar1(&mut rng, 0.97, 0.15, n);
    let spread_noise = ar1(&mut rng, 0.9, 0.35, n);
    let gs10: Vec<f64> = (0..n).map(|t| round4(8.5 - 5.5 * t as f64 / n as f64 + level_noise[t])).collect();
    let tb3ms: Vec<f64> = (0..n).map(|t| round4(gs10[t] - (1.7 + spread_noise[t] - 1.8 * inversion[t]))).collect();
    series.push(MonthlySeries::complete("GS10", start, gs10));
    series.push(MonthlySeries::complete("TB3MS", start, tb3ms));

    SyntheticMacro { series, label: MonthlySeries::complete("Recession", start, y) }
}

/// Monthly panel from a logit model on `beta.len()` standard-normal signals followed by
/// `n_noise` independent standard-normal columns. Names are `s0..` then `n0..`.
pub fn logit_panel(seed: u64, n: usize, intercept: f64, beta: &[f64], n_noise: usize) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = beta.len() + n_noise;
    let x = DMatrix::from_vec(n, p, sim::normals(&mut rng, n * p));
    let y: Vec<u8> = (0..n)
        .map(|i| {
            let eta = intercept + beta.iter().enumerate().map(|(j, b)| b * x[(i, j)]).sum::<f64>();
            u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
        })
        .collect();
    let names = (0..beta.len()).map(|j| format!("s{j}")).chain((0..n_noise).map(|j| format!("n{j}"))).collect();
    let start = MonthDate::new(1900, 1).expect("valid month");
    Panel::new((0..n).map(|i| start.plus_months(i as i64)).collect(), x, names, y, "Recession").expect("well-formed panel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let m = synthetic_macro(FIXTURE_SEED);
        assert_eq!(m.series.len(), 20);
        assert!(m.series.iter().all(|s| s.len() == FIXTURE_MONTHS && s.start() == fixture_start()));
        let heads: Vec<usize> = m.series.iter().map(MonthlySeries::missing_head).filter(|&h| h > 0).collect();
        assert_eq!(heads, vec![18, 13, 4]);
        assert_eq!(m.label.observed().iter().sum::<f64>(), 40.0);
        assert_eq!(m.label.end(), MonthDate::new(2022, 6).unwrap());
    }

    #[test]
    fn recession_months_match_episode_lengths() {
        let y = recession_indicator(fixture_start(), FIXTURE_MONTHS);
        let mut runs = Vec::new();
        let mut len = 0;
        for v in y.iter().chain(std::iter::once(&0.0)) {
            if *v == 1.0 {
                len += 1;
            } else if len > 0 {
                runs.push(len);
                len = 0;
            }
        }
        assert_eq!(runs, vec![9, 9, 19, 3]);
    }

    #[test]
    fn fixture_is_seeded() {
        assert_eq!(synthetic_macro(1), synthetic_macro(1));
        assert_ne!(synthetic_macro(1), synthetic_macro(2));
    }

    #[test]
    fn logit_panel_layout() {
        let p = logit_panel(3, 500, -1.0, &[2.0, -1.0], 3);
        assert_eq!(p.feature_names(), ["s0", "s1", "n0", "n1", "n2"]);
        let rate = p.positives() as f64 / 500.0;
        assert!((0.2..0.5).contains(&rate), "{rate}");
    }
}
