//! Price CSV files: one dated price column per file, plus panel export.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use oilcast_core::series::{AlignedPanel, PriceSeries, SeriesId};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which header names hold the date and the price.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub date: String,
    pub price: String,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self { date: "Date".into(), price: "Price".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DateFormat {
    /// `YYYY-MM-DD`
    Iso,
    /// `MM/DD/YYYY`
    UsSlash,
}

impl DateFormat {
    fn detect(sample: &str) -> Self {
        if sample.contains('/') {
            DateFormat::UsSlash
        } else {
            DateFormat::Iso
        }
    }

    fn pattern(self) -> &'static str {
        match self {
            DateFormat::Iso => "%Y-%m-%d",
            DateFormat::UsSlash => "%m/%d/%Y",
        }
    }

    pub fn parse(self, s: &str) -> Option<NaiveDate> {
        NaiveDate::parse_from_str(s.trim(), self.pattern()).ok()
    }
}

/// What happened to the rows of one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    /// Rows whose price was missing, unparseable, non-finite or not positive.
    pub rows_dropped: usize,
    pub date_format: Option<DateFormat>,
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::MissingColumn { path: path.into(), column: name.into() })
}

/// Reads a dated price series sorted ascending by date.
pub fn load_csv(path: &Path, id: impl Into<SeriesId>, columns: &ColumnSpec) -> Result<(PriceSeries, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(file);
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let date_col = column_index(&headers, &columns.date, path)?;
    let price_col = column_index(&headers, &columns.price, path)?;

    let mut format = None;
    let mut rows = Vec::new();
    let mut report = LoadReport { rows_read: 0, rows_kept: 0, rows_dropped: 0, date_format: None };
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let raw_date = record.get(date_col).unwrap_or("");
        if raw_date.is_empty() && record.iter().all(str::is_empty) {
            continue;
        }
        report.rows_read += 1;
        let line = record.position().map_or(0, |p| p.line());
        let fmt = *format.get_or_insert_with(|| DateFormat::detect(raw_date));
        let date = fmt
            .parse(raw_date)
            .ok_or_else(|| Error::BadDate { path: path.into(), line, value: raw_date.into() })?;
        match record.get(price_col).and_then(|p| p.parse::<f64>().ok()) {
            Some(price) if price.is_finite() && price > 0.0 => rows.push((date, price)),
            _ => report.rows_dropped += 1,
        }
    }
    report.date_format = format;
    if rows.is_empty() {
        return Err(Error::NoUsableRows { path: path.into() });
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate { path: path.into(), date: w[0].0 });
    }
    report.rows_kept = rows.len();
    let (dates, values) = rows.into_iter().unzip();
    Ok((PriceSeries::new(id, dates, values)?, report))
}

/// Writes `series` with ISO dates and shortest round-trip price formatting,
/// so [`load_csv`] reads back identical values.
pub fn write_csv(series: &PriceSeries, path: &Path, columns: &ColumnSpec) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", columns.date, columns.price));
    for (d, v) in series.dates().iter().zip(series.values()) {
        out.push_str(&format!("{d},{v}\n"));
    }
    write_file(path, out.as_bytes())
}

/// `date` followed by one column per series id.
pub fn write_panel_csv(panel: &AlignedPanel, path: &Path) -> Result<()> {
    let mut out = String::from("date");
    let cols: Vec<(&SeriesId, &[f64])> = panel.columns().collect();
    for (id, _) in &cols {
        out.push(',');
        out.push_str(id.as_str());
    }
    out.push('\n');
    for (i, d) in panel.dates().iter().enumerate() {
        out.push_str(&d.to_string());
        for (_, values) in &cols {
            out.push_str(&format!(",{}", values[i]));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
