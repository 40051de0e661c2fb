use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{DatasetError, MonthDate, MonthlySeries, Result};

/// Load every non-date column of a monthly CSV as a series.
pub fn load_csv(path: impl AsRef<Path>, date_column: &str) -> Result<Vec<MonthlySeries>> {
    let file = File::open(path.as_ref())?;
    load_csv_reader(file, date_column)
}

pub fn load_csv_reader<R: Read>(reader: R, date_column: &str) -> Result<Vec<MonthlySeries>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let date_idx = header
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| DatasetError::MissingDateColumn(date_column.to_string()))?;
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(DatasetError::DuplicateName(h.clone()));
        }
    }
    let value_cols: Vec<usize> = (0..header.len()).filter(|&i| i != date_idx).collect();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); value_cols.len()];
    let mut start: Option<MonthDate> = None;
    let mut prev: Option<MonthDate> = None;

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date: MonthDate = raw_date
            .parse()
            .map_err(|_| DatasetError::MalformedDate { row, value: raw_date.to_string() })?;
        if let Some(p) = prev {
            let expected = p.succ();
            if date != expected {
                return Err(DatasetError::NonContiguousDates { row, expected, found: date });
            }
        } else {
            start = Some(date);
        }
        prev = Some(date);
        for (slot, &ci) in value_cols.iter().enumerate() {
            let cell = record.get(ci).unwrap_or("");
            let value = if cell.is_empty() {
                None
            } else {
                Some(parse_number(cell).ok_or_else(|| DatasetError::MalformedNumber {
                    column: header[ci].clone(),
                    row,
                    value: cell.to_string(),
                })?)
            };
            columns[slot].push(value);
        }
    }
    let start = start.ok_or(DatasetError::EmptyFile)?;
    value_cols
        .iter()
        .zip(columns)
        .map(|(&ci, values)| MonthlySeries::new(header[ci].clone(), start, values))
        .collect()
}

/// Plain decimal or scientific notation; no thousands separators, no inf/nan.
pub fn parse_number(cell: &str) -> Option<f64> {
    let s = cell.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Write series sharing one date range; missing-head cells are left empty.
pub fn write_series_csv<W: Write>(writer: W, date_column: &str, series: &[MonthlySeries]) -> Result<()> {
    let Some(first) = series.first() else {
        return Err(DatasetError::EmptyFile);
    };
    let (start, len) = (first.start(), first.len());
    for s in series {
        if s.start() != start || s.len() != len {
            return Err(DatasetError::Misaligned {
                minuend: first.name().to_string(),
                subtrahend: s.name().to_string(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![date_column.to_string()];
    header.extend(series.iter().map(|s| s.name().to_string()));
    w.write_record(&header)?;
    let cols: Vec<Vec<Option<f64>>> = series.iter().map(MonthlySeries::values).collect();
    for i in 0..len {
        let mut rec = vec![start.plus_months(i as i64).to_string()];
        rec.extend(cols.iter().map(|c| c[i].map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
