//! Monthly series ingestion, transforms, panel alignment and train/test splits.

mod date;
mod io;
mod panel;
mod scale;
mod transform;

pub use date::{DateWindow, MonthDate, ParseMonthError};
pub use io::{load_csv, load_csv_reader, parse_number, write_series_csv};
pub use panel::{align, split, Panel, SplitMode, SplitSpec};
pub use scale::Standardizer;
pub use transform::{spread, transform, TransformSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("date column {0:?} not found in header")]
    MissingDateColumn(String),
    #[error("duplicate column name {0:?}")]
    DuplicateName(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("row {row}: malformed date {value:?} (expected YYYY-MM)")]
    MalformedDate { row: usize, value: String },
    #[error("row {row}: expected month {expected}, found {found}")]
    NonContiguousDates { row: usize, expected: MonthDate, found: MonthDate },
    #[error("row {row}: month {found} does not follow {previous}")]
    UnorderedDates { row: usize, previous: MonthDate, found: MonthDate },
    #[error("column {column:?} row {row}: panel cell is empty")]
    EmptyCell { column: String, row: usize },
    #[error("column {column:?} row {row}: missing value after the first observation")]
    InteriorMissingValue { column: String, row: usize },
    #[error("column {column:?} row {row}: malformed number {value:?}")]
    MalformedNumber { column: String, row: usize, value: String },
    #[error("series {series:?}: need {needed} observations, have {available}")]
    InsufficientHistory { series: String, needed: usize, available: usize },
    #[error("series {series:?}: lagged value is zero at {date}")]
    DivisionByZero { series: String, date: MonthDate },
    #[error("spread operands {minuend:?} and {subtrahend:?} are not aligned")]
    Misaligned { minuend: String, subtrahend: String },
    #[error("spread transform needs two series; use `spread`")]
    SpreadNeedsPair,
    #[error("series {series:?} does not cover {month}")]
    CoverageGap { series: String, month: MonthDate },
    #[error("label is not 0/1 at {month} (value {value})")]
    NonBinaryLabel { month: MonthDate, value: f64 },
    #[error("window end precedes start")]
    InvalidWindow,
    #[error("panel has {rows} rows, at least {required} required")]
    TooFewRows { rows: usize, required: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("panel shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// A named monthly sequence whose missing values, if any, form a prefix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MonthlySeries {
    name: String,
    start: MonthDate,
    missing_head: usize,
    observed: Vec<f64>,
}

impl MonthlySeries {
    /// Build from optional values; errors if a gap follows an observation.
    pub fn new(name: impl Into<String>, start: MonthDate, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        let missing_head = values.iter().take_while(|v| v.is_none()).count();
        let mut observed = Vec::with_capacity(values.len() - missing_head);
        for (i, v) in values.iter().enumerate().skip(missing_head) {
            match v {
                Some(x) => observed.push(*x),
                None => {
                    return Err(DatasetError::InteriorMissingValue { column: name, row: i + 1 });
                }
            }
        }
        Ok(Self { name, start, missing_head, observed })
    }

    pub fn complete(name: impl Into<String>, start: MonthDate, values: Vec<f64>) -> Self {
        Self { name: name.into(), start, missing_head: 0, observed: values }
    }

    pub fn with_missing_head(
        name: impl Into<String>,
        start: MonthDate,
        missing_head: usize,
        observed: Vec<f64>,
    ) -> Self {
        Self { name: name.into(), start, missing_head, observed }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn start(&self) -> MonthDate {
        self.start
    }

    /// Last month covered (including the missing head in the count).
    pub fn end(&self) -> MonthDate {
        self.start.plus_months(self.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.missing_head + self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing_head(&self) -> usize {
        self.missing_head
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn first_observed(&self) -> MonthDate {
        self.start.plus_months(self.missing_head as i64)
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        std::iter::repeat_n(None, self.missing_head)
            .chain(self.observed.iter().map(|v| Some(*v)))
            .collect()
    }

    pub fn value_at(&self, date: MonthDate) -> Option<f64> {
        let off = date.months_since(&self.start);
        if off < self.missing_head as i64 || off >= self.len() as i64 {
            return None;
        }
        Some(self.observed[off as usize - self.missing_head])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jan(y: i32) -> MonthDate {
        MonthDate::new(y, 1).unwrap()
    }

    #[test]
    fn prefix_gaps_are_a_missing_head() {
        let s = MonthlySeries::new("y", jan(2000), vec![None, None, Some(1.0), Some(2.0)]).unwrap();
        assert_eq!(s.missing_head(), 2);
        assert_eq!(s.observed(), &[1.0, 2.0]);
        assert_eq!(s.value_at(MonthDate::new(2000, 3).unwrap()), Some(1.0));
        assert_eq!(s.value_at(jan(2000)), None);
        assert_eq!(s.end(), MonthDate::new(2000, 4).unwrap());
    }

    #[test]
    fn interior_gap_is_rejected() {
        let err = MonthlySeries::new("z", jan(2000), vec![Some(1.0), None, Some(2.0)]).unwrap_err();
        assert!(matches!(err, DatasetError::InteriorMissingValue { row: 2, .. }));
    }
}
