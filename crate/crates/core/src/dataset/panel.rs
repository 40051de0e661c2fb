use std::collections::HashSet;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::parse_number;
use super::{DatasetError, DateWindow, MonthDate, MonthlySeries, Result};

/// Aligned, complete feature matrix with a binary label per month.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<MonthDate>,
    features: DMatrix<f64>,
    feature_names: Vec<String>,
    label: Vec<u8>,
    label_name: String,
}

impl Panel {
    pub fn new(
        dates: Vec<MonthDate>,
        features: DMatrix<f64>,
        feature_names: Vec<String>,
        label: Vec<u8>,
        label_name: impl Into<String>,
    ) -> Result<Self> {
        let n = dates.len();
        if features.nrows() != n || label.len() != n {
            return Err(DatasetError::Shape(format!(
                "{} dates, {} feature rows, {} labels",
                n,
                features.nrows(),
                label.len()
            )));
        }
        if features.ncols() != feature_names.len() {
            return Err(DatasetError::Shape(format!(
                "{} columns but {} names",
                features.ncols(),
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateName(name.clone()));
            }
        }
        if let Some(i) = label.iter().position(|&v| v > 1) {
            return Err(DatasetError::NonBinaryLabel { month: dates[i], value: label[i] as f64 });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::Shape("non-finite feature value".into()));
        }
        Ok(Self { dates, features, feature_names, label, label_name: label_name.into() })
    }

    pub fn dates(&self) -> &[MonthDate] {
        &self.dates
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label(&self) -> &[u8] {
        &self.label
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.label.iter().filter(|&&v| v == 1).count()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.feature_index(name).map(|j| self.features.column(j).iter().copied().collect())
    }

    /// Label as 0.0/1.0.
    pub fn label_f64(&self) -> Vec<f64> {
        self.label.iter().map(|&v| v as f64).collect()
    }

    /// Keep the named features, in the order given.
    pub fn select_features(&self, names: &[String]) -> Result<Panel> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.feature_index(n).ok_or_else(|| DatasetError::UnknownColumn(n.clone())))
            .collect::<Result<_>>()?;
        let features = self.features.select_columns(&idx);
        Panel::new(self.dates.clone(), features, names.to_vec(), self.label.clone(), self.label_name.clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Panel {
        Panel {
            dates: rows.iter().map(|&i| self.dates[i]).collect(),
            features: self.features.select_rows(rows),
            feature_names: self.feature_names.clone(),
            label: rows.iter().map(|&i| self.label[i]).collect(),
            label_name: self.label_name.clone(),
        }
    }

    /// Append a feature column.
    pub fn with_feature(&self, name: &str, values: &[f64]) -> Result<Panel> {
        if values.len() != self.n_rows() {
            return Err(DatasetError::Shape(format!("column {name:?} has {} rows", values.len())));
        }
        let p = self.n_features();
        let features = DMatrix::from_fn(self.n_rows(), p + 1, |i, j| if j < p { self.features[(i, j)] } else { values[i] });
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        Panel::new(self.dates.clone(), features, names, self.label.clone(), self.label_name.clone())
    }

    /// CSV with a `date` column, the features, and the label last.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push(self.label_name.clone());
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(self.dates[i].to_string());
            rec.extend((0..self.n_features()).map(|j| self.features[(i, j)].to_string()));
            rec.push(self.label[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of `write_csv`. Months must increase but may skip, so split halves load too.
    pub fn read_csv<R: Read>(reader: R, label_name: &str) -> Result<Panel> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("date") {
            return Err(DatasetError::MissingDateColumn("date".into()));
        }
        let label_idx = header.iter().position(|h| h == label_name).ok_or_else(|| DatasetError::UnknownColumn(label_name.to_string()))?;
        let feature_idx: Vec<usize> = (1..header.len()).filter(|&i| i != label_idx).collect();
        let mut dates: Vec<MonthDate> = Vec::new();
        let mut cols = vec![Vec::new(); feature_idx.len()];
        let mut label = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            let raw = record.get(0).unwrap_or("");
            let date: MonthDate = raw.parse().map_err(|_| DatasetError::MalformedDate { row, value: raw.to_string() })?;
            if let Some(&previous) = dates.last() {
                if date <= previous {
                    return Err(DatasetError::UnorderedDates { row, previous, found: date });
                }
            }
            dates.push(date);
            let cell = |ci: usize| -> Result<f64> {
                let text = record.get(ci).unwrap_or("");
                if text.is_empty() {
                    return Err(DatasetError::EmptyCell { column: header[ci].clone(), row });
                }
                parse_number(text).ok_or_else(|| DatasetError::MalformedNumber { column: header[ci].clone(), row, value: text.to_string() })
            };
            for (col, &ci) in cols.iter_mut().zip(&feature_idx) {
                col.push(cell(ci)?);
            }
            label.push(match cell(label_idx)? {
                v if v == 0.0 => 0,
                v if v == 1.0 => 1,
                value => return Err(DatasetError::NonBinaryLabel { month: date, value }),
            });
        }
        if dates.is_empty() {
            return Err(DatasetError::EmptyFile);
        }
        let features = DMatrix::from_vec(dates.len(), cols.len(), cols.concat());
        Panel::new(dates, features, feature_idx.iter().map(|&i| header[i].clone()).collect(), label, label_name)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<std::path::Path>, label_name: &str) -> Result<Panel> {
        Panel::read_csv(std::fs::File::open(path)?, label_name)
    }
}

/// Build a panel covering exactly `window`, columns in input order.
pub fn align(series: &[MonthlySeries], label: &MonthlySeries, window: DateWindow) -> Result<Panel> {
    if window.end < window.start {
        return Err(DatasetError::InvalidWindow);
    }
    let n = window.len();
    let dates: Vec<MonthDate> = window.months().collect();
    let fetch = |s: &MonthlySeries, d: MonthDate| {
        s.value_at(d).ok_or_else(|| DatasetError::CoverageGap { series: s.name().to_string(), month: d })
    };
    let mut cols = Vec::with_capacity(series.len() * n);
    for s in series {
        for &d in &dates {
            cols.push(fetch(s, d)?);
        }
    }
    let mut y = Vec::with_capacity(n);
    for &d in &dates {
        let v = fetch(label, d)?;
        if v == 0.0 {
            y.push(0u8);
        } else if v == 1.0 {
            y.push(1u8);
        } else {
            return Err(DatasetError::NonBinaryLabel { month: d, value: v });
        }
    }
    let features = DMatrix::from_vec(n, series.len(), cols);
    let names = series.iter().map(|s| s.name().to_string()).collect();
    Panel::new(dates, features, names, y, label.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitMode {
    #[default]
    Chronological,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    #[serde(default)]
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.75, mode: SplitMode::Chronological }
    }
}

impl SplitSpec {
    /// Row indices of the train and test parts, each ascending.
    pub fn indices(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if n < 8 {
            return Err(DatasetError::TooFewRows { rows: n, required: 8 });
        }
        let f = self.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(DatasetError::InvalidSplit(format!("train fraction {f} outside (0,1)")));
        }
        // guard against 0.7 * 10 = 7.000000000000001
        let n_train = ((f * n as f64) - 1e-9).ceil() as usize;
        if n_train == 0 || n_train >= n {
            return Err(DatasetError::InvalidSplit(format!("fraction {f} leaves an empty side of {n} rows")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        if let SplitMode::Random { seed } = self.mode {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
        }
        let mut train = order[..n_train].to_vec();
        let mut test = order[n_train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        Ok((train, test))
    }
}

pub fn split(panel: &Panel, spec: &SplitSpec) -> Result<(Panel, Panel)> {
    let (train, test) = spec.indices(panel.n_rows())?;
    Ok((panel.select_rows(&train), panel.select_rows(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32) -> MonthDate {
        MonthDate::new(y, m).unwrap()
    }

    fn series(name: &str, start: MonthDate, n: usize) -> MonthlySeries {
        MonthlySeries::complete(name, start, (0..n).map(|i| i as f64 * 0.5).collect())
    }

    #[test]
    fn align_438_months() {
        let w = DateWindow::new(d(1986, 1), d(2022, 6));
        let label = MonthlySeries::complete("Recession", d(1986, 1), (0..438).map(|i| (i % 11 == 0) as u8 as f64).collect());
        let p = align(&[series("a", d(1986, 1), 438), series("b", d(1985, 1), 450)], &label, w).unwrap();
        assert_eq!(p.n_rows(), 438);
        assert_eq!(p.n_features(), 2);
        assert_eq!(p.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(p.column("b").unwrap()[0], 6.0);
    }

    #[test]
    fn single_month_window() {
        let w = DateWindow::new(d(2000, 5), d(2000, 5));
        let label = MonthlySeries::complete("y", d(2000, 1), vec![0.0; 12]);
        let p = align(&[series("a", d(2000, 1), 12)], &label, w).unwrap();
        assert_eq!(p.n_rows(), 1);
    }

    #[test]
    fn late_series_is_a_coverage_gap() {
        let w = DateWindow::new(d(2000, 1), d(2000, 12));
        let label = MonthlySeries::complete("y", d(2000, 1), vec![0.0; 12]);
        let err = align(&[series("late", d(2000, 4), 9)], &label, w).unwrap_err();
        match err {
            DatasetError::CoverageGap { series, month } => {
                assert_eq!(series, "late");
                assert_eq!(month, d(2000, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_binary_label_rejected() {
        let w = DateWindow::new(d(2000, 1), d(2000, 2));
        let label = MonthlySeries::complete("y", d(2000, 1), vec![0.0, 0.5]);
        assert!(matches!(
            align(&[series("a", d(2000, 1), 2)], &label, w),
            Err(DatasetError::NonBinaryLabel { .. })
        ));
    }

    fn toy_panel(n: usize) -> Panel {
        let w = DateWindow::new(d(1986, 1), d(1986, 1).plus_months(n as i64 - 1));
        let label = MonthlySeries::complete("y", d(1986, 1), (0..n).map(|i| (i % 3 == 0) as u8 as f64).collect());
        align(&[series("a", d(1986, 1), n)], &label, w).unwrap()
    }

    #[test]
    fn chronological_split_counts() {
        let (tr, te) = split(&toy_panel(438), &SplitSpec::default()).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (329, 109));
        assert_eq!(tr.dates().last().unwrap().succ(), te.dates()[0]);
        let (tr, te) = split(&toy_panel(8), &SplitSpec { train_fraction: 0.5, mode: SplitMode::Chronological }).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (4, 4));
    }

    #[test]
    fn random_split_is_deterministic() {
        let spec = SplitSpec { train_fraction: 0.75, mode: SplitMode::Random { seed: 1 } };
        let a = spec.indices(438).unwrap();
        let b = spec.indices(438).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, (0..329).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            split(&toy_panel(7), &SplitSpec::default()),
            Err(DatasetError::TooFewRows { rows: 7, .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = toy_panel(20);
        let noisy: Vec<f64> = (0..20).map(|i| (i as f64).sin() * 1e-7 + 1.0 / 3.0).collect();
        let p = p.with_feature("noisy", &noisy).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice(), "y").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn random_split_halves_reload() {
        let (tr, te) = split(&toy_panel(40), &SplitSpec { train_fraction: 0.75, mode: SplitMode::Random { seed: 3 } }).unwrap();
        for half in [tr, te] {
            let mut buf = Vec::new();
            half.write_csv(&mut buf).unwrap();
            assert_eq!(Panel::read_csv(buf.as_slice(), "y").unwrap(), half);
        }
        let swapped = "date,a,y\n2000-02,1,0\n2000-01,2,1\n";
        assert!(matches!(Panel::read_csv(swapped.as_bytes(), "y"), Err(DatasetError::UnorderedDates { row: 2, .. })));
        let hole = "date,a,y\n2000-01,,0\n";
        assert!(matches!(Panel::read_csv(hole.as_bytes(), "y"), Err(DatasetError::EmptyCell { row: 1, .. })));
    }

    proptest! {
        #[test]
        fn split_partitions_rows(n in 8usize..600, f in 0.05f64..0.95, seed in any::<u64>(), random in any::<bool>()) {
            let mode = if random { SplitMode::Random { seed } } else { SplitMode::Chronological };
            if let Ok((tr, te)) = (SplitSpec { train_fraction: f, mode }).indices(n) {
                prop_assert_eq!(tr.len() + te.len(), n);
                let mut all: Vec<usize> = tr.iter().chain(te.iter()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }
}
