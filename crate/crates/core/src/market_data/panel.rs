use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use rayon::prelude::*;

use super::session::{sample_last_tick, PriceGrid, SessionSpec, TradingCalendar};
use super::ticks::TickRecord;
use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";
pub const TIME_FORMAT: &str = "%H:%M:%S";

/// Synchronized log returns of `d` instruments on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    date: NaiveDate,
    instruments: Vec<String>,
    grid_times: Vec<NaiveDateTime>,
    returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    /// `grid_times` holds `N + 1` instants and each return row `N` values.
    pub fn new(
        date: NaiveDate,
        instruments: Vec<String>,
        grid_times: Vec<NaiveDateTime>,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if instruments.len() != returns.len() {
            return Err(Error::LengthMismatch {
                left: instruments.len(),
                right: returns.len(),
            });
        }
        if grid_times.len() < 2 {
            return Err(Error::SeriesTooShort {
                len: grid_times.len().saturating_sub(1),
                required: 1,
            });
        }
        if grid_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid times must increase".into()));
        }
        let n = grid_times.len() - 1;
        for (name, row) in instruments.iter().zip(&returns) {
            if row.len() != n {
                return Err(Error::LengthMismatch { left: n, right: row.len() });
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::InvalidInput(format!("{date} {name}: non-finite return")));
            }
        }
        let unique: BTreeSet<&String> = instruments.iter().collect();
        if unique.len() != instruments.len() {
            return Err(Error::InvalidInput("duplicate instrument in panel".into()));
        }
        Ok(ReturnPanel {
            date,
            instruments,
            grid_times,
            returns,
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn instruments(&self) -> &[String] {
        &self.instruments
    }

    pub fn grid_times(&self) -> &[NaiveDateTime] {
        &self.grid_times
    }

    /// Left endpoint of return interval `i`.
    pub fn interval_start(&self, i: usize) -> NaiveDateTime {
        self.grid_times[i]
    }

    /// Number of returns per instrument, `N`.
    pub fn len(&self) -> usize {
        self.grid_times.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.instruments.len()
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn index_of(&self, instrument: &str) -> Option<usize> {
        self.instruments.iter().position(|n| n == instrument)
    }

    pub fn series(&self, instrument: &str) -> Option<&[f64]> {
        self.index_of(instrument).map(|i| self.returns[i].as_slice())
    }

    /// Sub-panel with the named instruments, in the given order.
    pub fn select(&self, names: &[String]) -> Result<ReturnPanel> {
        let returns = names
            .iter()
            .map(|n| {
                self.series(n)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::InvalidInput(format!("{}: instrument '{n}' not in panel", self.date)))
            })
            .collect::<Result<Vec<_>>>()?;
        ReturnPanel::new(self.date, names.to_vec(), self.grid_times.clone(), returns)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DropReason {
    ExcludedDate,
    Weekend,
    MissingInstrument(String),
    NoTrades(String),
    LowTrade,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::ExcludedDate => f.write_str("excluded_date"),
            DropReason::Weekend => f.write_str("weekend"),
            DropReason::MissingInstrument(name) => write!(f, "missing_instrument:{name}"),
            DropReason::NoTrades(name) => write!(f, "no_trades:{name}"),
            DropReason::LowTrade => f.write_str("low_trade"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DropRecord {
    pub date: NaiveDate,
    pub reason: DropReason,
}

/// Turns per-instrument grids of one date into a panel, or the reason the
/// date is dropped.
///
/// A date is dropped when it is excluded, when an instrument has no grid or
/// no session trade, or when every instrument traded in fewer than the
/// threshold share of 5-minute bins.
pub fn build_panel(
    date: NaiveDate,
    grids: &[(String, Option<PriceGrid>)],
    spec: &SessionSpec,
    calendar: &TradingCalendar,
) -> std::result::Result<ReturnPanel, DropReason> {
    if calendar.is_excluded(date) {
        return Err(DropReason::ExcludedDate);
    }
    if calendar.is_weekend(date) {
        return Err(DropReason::Weekend);
    }
    let mut present = Vec::with_capacity(grids.len());
    for (name, grid) in grids {
        match grid {
            Some(g) => present.push(g),
            None => return Err(DropReason::NoTrades(name.clone())),
        }
    }
    if !present.is_empty() && present.iter().all(|g| g.trade_fraction < calendar.low_trade_threshold) {
        return Err(DropReason::LowTrade);
    }
    let names = grids.iter().map(|(n, _)| n.clone()).collect();
    let returns = present.iter().map(|g| g.log_returns()).collect();
    ReturnPanel::new(date, names, spec.grid_times(date), returns)
        .map_err(|_| DropReason::NoTrades("invalid grid".into()))
}

/// Panels retained over all dates plus the drop log.
#[derive(Debug, Clone, Default)]
pub struct PanelSet {
    pub panels: Vec<ReturnPanel>,
    pub drops: Vec<DropRecord>,
}

/// Builds panels for every date on which any listed instrument traded.
pub fn build_panels(
    ticks: &BTreeMap<String, Vec<TickRecord>>,
    instruments: &[String],
    spec: &SessionSpec,
    calendar: &TradingCalendar,
) -> Result<PanelSet> {
    calendar.validate()?;
    let mut dates = BTreeSet::new();
    for name in instruments {
        if let Some(series) = ticks.get(name) {
            dates.extend(series.iter().map(|t| t.timestamp.date()));
        }
    }
    let outcomes: Vec<(NaiveDate, std::result::Result<ReturnPanel, DropReason>)> = dates
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|date| {
            let mut grids = Vec::with_capacity(instruments.len());
            for name in instruments {
                match ticks.get(name) {
                    Some(series) if series.iter().any(|t| t.timestamp.date() == date) => {
                        grids.push((name.clone(), sample_last_tick(series, date, spec)));
                    }
                    _ => return (date, Err(DropReason::MissingInstrument(name.clone()))),
                }
            }
            (date, build_panel(date, &grids, spec, calendar))
        })
        .collect();
    let mut set = PanelSet::default();
    for (date, outcome) in outcomes {
        match outcome {
            Ok(panel) => set.panels.push(panel),
            Err(reason) => set.drops.push(DropRecord { date, reason }),
        }
    }
    Ok(set)
}

pub fn panel_file_name(date: NaiveDate) -> String {
    format!("{}.csv", date.format(DATE_FORMAT))
}

/// Writes `date,grid_time,<instrument>...` with one row per return; the
/// grid time is the left endpoint of the interval.
pub fn write_panel_csv(panel: &ReturnPanel, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string(), "grid_time".to_string()];
    header.extend(panel.instruments.iter().cloned());
    w.write_record(&header).map_err(csv_write)?;
    let date = panel.date.format(DATE_FORMAT).to_string();
    for i in 0..panel.len() {
        let mut row = vec![date.clone(), panel.grid_times[i].format(TIME_FORMAT).to_string()];
        row.extend(panel.returns.iter().map(|r| r[i].to_string()));
        w.write_record(&row).map_err(csv_write)?;
    }
    w.flush().map_err(|e| Error::io("<panel>", e))?;
    Ok(())
}

fn csv_write(e: csv::Error) -> Error {
    Error::csv("<output>", e)
}

/// Reads a panel written by [`write_panel_csv`], checking that its rows are
/// exactly the session grid of its date.
pub fn read_panel_csv(path: &Path, input: impl Read, spec: &SessionSpec) -> Result<ReturnPanel> {
    let bad = |msg: String| Error::InvalidInput(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.len() < 3 || &headers[0] != "date" || &headers[1] != "grid_time" {
        return Err(bad("header must be date,grid_time,<instruments>".into()));
    }
    let instruments: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut date: Option<NaiveDate> = None;
    let mut times = Vec::new();
    let mut returns = vec![Vec::new(); instruments.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = row + 2;
        if rec.len() != headers.len() {
            return Err(bad(format!("line {line}: expected {} fields", headers.len())));
        }
        let d = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT)
            .map_err(|_| bad(format!("line {line}: invalid date '{}'", &rec[0])))?;
        if *date.get_or_insert(d) != d {
            return Err(bad(format!("line {line}: mixed dates")));
        }
        let t = NaiveTime::parse_from_str(&rec[1], TIME_FORMAT)
            .map_err(|_| bad(format!("line {line}: invalid time '{}'", &rec[1])))?;
        times.push(d.and_time(t));
        for (k, series) in returns.iter_mut().enumerate() {
            let raw = &rec[k + 2];
            let v: f64 = raw.parse().map_err(|_| bad(format!("line {line}: invalid return '{raw}'")))?;
            series.push(v);
        }
    }
    let date = date.ok_or_else(|| bad("no rows".into()))?;
    let grid = spec.grid_times(date);
    if times.len() != grid.len() - 1 || times.iter().zip(&grid).any(|(a, b)| a != b) {
        return Err(bad(format!(
            "rows do not match the {}-interval session grid",
            spec.intervals()
        )));
    }
    ReturnPanel::new(date, instruments, grid, returns).map_err(|e| bad(e.to_string()))
}

pub fn write_drop_log(drops: &[DropRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "reason"]).map_err(csv_write)?;
    for d in drops {
        w.write_record([d.date.format(DATE_FORMAT).to_string(), d.reason.to_string()])
            .map_err(csv_write)?;
    }
    w.flush().map_err(|e| Error::io("<drop log>", e))?;
    Ok(())
}
