use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column mapping for tick CSV files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TickSchema {
    pub timestamp: String,
    pub price: String,
    /// Optional volume column; missing means volume 0.
    pub volume: Option<String>,
    /// Optional instrument column for combined files.
    pub instrument: Option<String>,
    /// chrono format of wall-clock timestamps in the session timezone.
    /// RFC 3339 timestamps with an explicit offset are also accepted and
    /// converted.
    pub timestamp_format: String,
    pub delimiter: char,
}

impl Default for TickSchema {
    fn default() -> Self {
        TickSchema {
            timestamp: "timestamp".into(),
            price: "price".into(),
            volume: Some("volume".into()),
            instrument: None,
            timestamp_format: "%Y-%m-%d %H:%M:%S%.f".into(),
            delimiter: ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    /// Wall-clock time in the session timezone.
    pub timestamp: NaiveDateTime,
    pub price: f64,
    pub volume: u64,
    pub instrument: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiagnostic {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

/// Parsed tick file: valid records sorted by time, plus rejected rows.
#[derive(Debug, Clone, Default)]
pub struct TickSeries {
    pub records: Vec<TickRecord>,
    pub total_rows: usize,
    pub rejected: usize,
    pub diagnostics: Vec<RowDiagnostic>,
}

impl TickSeries {
    /// Splits records by instrument, preserving time order.
    pub fn by_instrument(&self) -> BTreeMap<String, Vec<TickRecord>> {
        let mut out: BTreeMap<String, Vec<TickRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.instrument.clone()).or_default().push(r.clone());
        }
        out
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
        Error::InvalidConfig(format!("{}: missing column '{name}'", path.display()))
    })
}

fn parse_timestamp(raw: &str, format: &str, tz: Tz) -> std::result::Result<NaiveDateTime, String> {
    if let Ok(t) = NaiveDateTime::parse_from_str(raw, format) {
        return Ok(t);
    }
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&tz).naive_local())
        .map_err(|_| format!("unparsable timestamp '{raw}'"))
}

/// Reads a tick CSV. Rows with bad timestamps, non-positive or non-finite
/// prices, or bad volumes are rejected and reported; they never abort the
/// read. `default_instrument` names records when the schema has no
/// instrument column.
pub fn parse_ticks(path: &Path, schema: &TickSchema, tz: Tz, default_instrument: &str) -> Result<TickSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
        Err(_) => csv::StringRecord::new(),
    };
    if headers.is_empty() {
        return Err(Error::ZeroValidRows {
            path: path.to_path_buf(),
            rejected: 0,
        });
    }
    let ts_col = column(&headers, &schema.timestamp, path)?;
    let price_col = column(&headers, &schema.price, path)?;
    let volume_col = schema.volume.as_deref().map(|c| column(&headers, c, path)).transpose()?;
    let inst_col = schema.instrument.as_deref().map(|c| column(&headers, c, path)).transpose()?;

    let mut series = TickSeries::default();
    for (row, result) in reader.records().enumerate() {
        series.total_rows += 1;
        let line = row as u64 + 2;
        let parsed = match result {
            Ok(rec) => parse_row(&rec, schema, tz, ts_col, price_col, volume_col, inst_col, default_instrument),
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            Err(e) => Err(e.to_string()),
        };
        match parsed {
            Ok(record) => series.records.push(record),
            Err(reason) => {
                series.rejected += 1;
                series.diagnostics.push(RowDiagnostic { line, reason });
            }
        }
    }
    if series.records.is_empty() {
        return Err(Error::ZeroValidRows {
            path: path.to_path_buf(),
            rejected: series.rejected,
        });
    }
    series.records.sort_by_key(|r| r.timestamp);
    Ok(series)
}

#[allow(clippy::too_many_arguments)]
fn parse_row(
    rec: &csv::StringRecord,
    schema: &TickSchema,
    tz: Tz,
    ts_col: usize,
    price_col: usize,
    volume_col: Option<usize>,
    inst_col: Option<usize>,
    default_instrument: &str,
) -> std::result::Result<TickRecord, String> {
    let field = |i: usize| rec.get(i).ok_or_else(|| format!("missing field {}", i + 1));
    let timestamp = parse_timestamp(field(ts_col)?, &schema.timestamp_format, tz)?;
    let raw_price = field(price_col)?;
    let price: f64 = raw_price.parse().map_err(|_| format!("unparsable price '{raw_price}'"))?;
    if !(price.is_finite() && price > 0.0) {
        return Err(format!("non-positive price {raw_price}"));
    }
    let volume = match volume_col {
        Some(i) => {
            let raw = field(i)?;
            raw.parse::<u64>().map_err(|_| format!("invalid volume '{raw}'"))?
        }
        None => 0,
    };
    let instrument = match inst_col {
        Some(i) => {
            let name = field(i)?;
            if name.is_empty() {
                return Err("empty instrument".into());
            }
            name.to_string()
        }
        None => default_instrument.to_string(),
    };
    Ok(TickRecord {
        timestamp,
        price,
        volume,
        instrument,
    })
}
