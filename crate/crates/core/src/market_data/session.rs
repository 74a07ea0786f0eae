use std::collections::BTreeSet;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use chrono_tz::Tz;

use super::ticks::TickRecord;
use crate::error::{Error, Result};

/// Width of the bins used by the low-trade rule.
pub const LOW_TRADE_BIN_SECONDS: i64 = 300;

/// Daily trading session on a regular sampling grid, in local wall-clock
/// time of `timezone`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionSpec {
    start: NaiveTime,
    end: NaiveTime,
    timezone: Tz,
    interval_seconds: u32,
}

impl SessionSpec {
    pub fn new(start: NaiveTime, end: NaiveTime, timezone: Tz, interval_seconds: u32) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidSession(format!("start {start} is not before end {end}")));
        }
        if interval_seconds == 0 {
            return Err(Error::InvalidSession("sampling interval must be positive".into()));
        }
        let length = (end - start).num_seconds();
        if length % i64::from(interval_seconds) != 0 {
            return Err(Error::InvalidSession(format!(
                "sampling interval {interval_seconds}s does not divide the {length}s session"
            )));
        }
        Ok(SessionSpec {
            start,
            end,
            timezone,
            interval_seconds,
        })
    }

    pub fn start(&self) -> NaiveTime {
        self.start
    }

    pub fn end(&self) -> NaiveTime {
        self.end
    }

    pub fn timezone(&self) -> Tz {
        self.timezone
    }

    pub fn interval_seconds(&self) -> u32 {
        self.interval_seconds
    }

    pub fn length_seconds(&self) -> i64 {
        (self.end - self.start).num_seconds()
    }

    /// Number of returns per day, `N`.
    pub fn intervals(&self) -> usize {
        (self.length_seconds() / i64::from(self.interval_seconds)) as usize
    }

    /// The `N + 1` grid instants of `date`.
    pub fn grid_times(&self, date: NaiveDate) -> Vec<NaiveDateTime> {
        let open = date.and_time(self.start);
        let step = Duration::seconds(i64::from(self.interval_seconds));
        (0..=self.intervals() as i32).map(|k| open + step * k).collect()
    }

    /// Whether `t` falls inside the session of its own date.
    pub fn contains(&self, t: NaiveDateTime) -> bool {
        let time = t.time();
        self.start <= time && time <= self.end
    }
}

/// Dates to skip plus the low-trade threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingCalendar {
    pub excluded_dates: BTreeSet<NaiveDate>,
    pub low_trade_threshold: f64,
    pub exclude_weekends: bool,
}

impl Default for TradingCalendar {
    fn default() -> Self {
        TradingCalendar {
            excluded_dates: BTreeSet::new(),
            low_trade_threshold: 0.6,
            exclude_weekends: true,
        }
    }
}

impl TradingCalendar {
    pub fn validate(&self) -> Result<()> {
        if !(self.low_trade_threshold > 0.0 && self.low_trade_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "low-trade threshold must lie in (0, 1], got {}",
                self.low_trade_threshold
            )));
        }
        Ok(())
    }

    pub fn is_weekend(&self, date: NaiveDate) -> bool {
        self.exclude_weekends && matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
    }

    pub fn is_excluded(&self, date: NaiveDate) -> bool {
        self.excluded_dates.contains(&date)
    }
}

/// Reads one `YYYY-MM-DD` date per line; blank lines and `#` comments are
/// skipped. A leading header line named `date` is allowed.
pub fn read_date_list(path: &Path) -> Result<BTreeSet<NaiveDate>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let entry = line.split('#').next().unwrap_or("").trim();
        let entry = entry.split(',').next().unwrap_or("").trim();
        if entry.is_empty() || (i == 0 && entry.eq_ignore_ascii_case("date")) {
            continue;
        }
        let date = NaiveDate::parse_from_str(entry, "%Y-%m-%d").map_err(|_| {
            Error::InvalidInput(format!("{}:{}: invalid date '{entry}'", path.display(), i + 1))
        })?;
        out.insert(date);
    }
    Ok(out)
}

/// Last-tick prices on one day's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    pub date: NaiveDate,
    /// `N + 1` prices.
    pub prices: Vec<f64>,
    /// Grid points before the first trade, filled with the first trade price.
    pub backfilled: usize,
    /// Share of 5-minute session bins holding at least one trade.
    pub trade_fraction: f64,
}

impl PriceGrid {
    pub fn log_returns(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
    }
}

/// Samples the last trade at or before each grid point of `date`.
///
/// `ticks` must be sorted by time; ticks of other dates are ignored. Returns
/// `None` when no trade falls inside the session, which makes the day
/// unusable for this instrument.
pub fn sample_last_tick(ticks: &[TickRecord], date: NaiveDate, spec: &SessionSpec) -> Option<PriceGrid> {
    let lo = ticks.partition_point(|t| t.timestamp.date() < date);
    let hi = ticks.partition_point(|t| t.timestamp.date() <= date);
    let day = &ticks[lo..hi];
    let in_session: Vec<&TickRecord> = day.iter().filter(|t| spec.contains(t.timestamp)).collect();
    let first_session = in_session.first()?;

    let grid = spec.grid_times(date);
    let first_price = day.first().map_or(first_session.price, |t| t.price);
    let mut prices = Vec::with_capacity(grid.len());
    let mut backfilled = 0;
    let mut next = 0;
    let mut last: Option<f64> = None;
    for &t in &grid {
        while next < day.len() && day[next].timestamp <= t {
            last = Some(day[next].price);
            next += 1;
        }
        match last {
            Some(p) => prices.push(p),
            None => {
                prices.push(first_price);
                backfilled += 1;
            }
        }
    }

    let open = date.and_time(spec.start());
    let bins = (spec.length_seconds() + LOW_TRADE_BIN_SECONDS - 1) / LOW_TRADE_BIN_SECONDS;
    let mut traded = vec![false; bins as usize];
    for t in &in_session {
        // Bins are (a, a + 5min]; a trade exactly at the open joins the first.
        let secs = (t.timestamp - open).num_seconds();
        let bin = ((secs + LOW_TRADE_BIN_SECONDS - 1) / LOW_TRADE_BIN_SECONDS - 1).clamp(0, bins - 1);
        traded[bin as usize] = true;
    }
    let trade_fraction = traded.iter().filter(|&&b| b).count() as f64 / bins as f64;

    Some(PriceGrid {
        date,
        prices,
        backfilled,
        trade_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(h: u32, m: u32, s: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2017, 3, 15).unwrap().and_hms_opt(h, m, s).unwrap()
    }

    fn tick(t: NaiveDateTime, price: f64) -> TickRecord {
        TickRecord {
            timestamp: t,
            price,
            volume: 1,
            instrument: "x".into(),
        }
    }

    fn spec(start: (u32, u32), end: (u32, u32), interval: u32) -> SessionSpec {
        SessionSpec::new(
            NaiveTime::from_hms_opt(start.0, start.1, 0).unwrap(),
            NaiveTime::from_hms_opt(end.0, end.1, 0).unwrap(),
            chrono_tz::America::Chicago,
            interval,
        )
        .unwrap()
    }

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 3, 15).unwrap()
    }

    #[test]
    fn session_validation() {
        let t = |h| NaiveTime::from_hms_opt(h, 0, 0).unwrap();
        assert!(SessionSpec::new(t(16), t(7), chrono_tz::UTC, 60).is_err());
        assert!(SessionSpec::new(t(7), t(16), chrono_tz::UTC, 0).is_err());
        assert!(SessionSpec::new(t(7), t(16), chrono_tz::UTC, 7 * 60).is_err());
        let s = SessionSpec::new(t(7), t(16), chrono_tz::UTC, 60).unwrap();
        assert_eq!(s.intervals(), 540);
        assert_eq!(s.grid_times(date()).len(), 541);
    }

    #[test]
    fn last_tick_definition() {
        let ticks = vec![
            tick(at(9, 0, 12), 100.1),
            tick(at(9, 0, 48), 100.3),
            tick(at(9, 1, 30), 100.2),
        ];
        let g = sample_last_tick(&ticks, date(), &spec((9, 0), (9, 5), 60)).unwrap();
        assert_eq!(g.prices[1], 100.3);
        assert_eq!(g.prices[2], 100.2);
        // Nothing in (09:02, 09:03]: carried forward.
        assert_eq!(g.prices[3], g.prices[2]);
        // 09:00 precedes the first trade.
        assert_eq!(g.prices[0], 100.1);
        assert_eq!(g.backfilled, 1);
    }

    #[test]
    fn single_tick_gives_flat_path() {
        let g = sample_last_tick(&[tick(at(9, 0, 30), 99.5)], date(), &spec((9, 0), (9, 10), 60)).unwrap();
        assert!(g.prices.iter().all(|&p| p == 99.5));
        assert!(g.log_returns().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn no_session_trades_is_unusable() {
        let ticks = vec![tick(at(8, 0, 0), 100.0), tick(at(17, 0, 0), 100.0)];
        assert!(sample_last_tick(&ticks, date(), &spec((9, 0), (16, 0), 60)).is_none());
        assert!(sample_last_tick(&[], date(), &spec((9, 0), (16, 0), 60)).is_none());
    }

    #[test]
    fn pre_session_trade_is_carried_in() {
        let ticks = vec![tick(at(8, 59, 0), 100.0), tick(at(9, 3, 0), 101.0)];
        let g = sample_last_tick(&ticks, date(), &spec((9, 0), (9, 5), 60)).unwrap();
        assert_eq!(g.prices, vec![100.0, 100.0, 100.0, 101.0, 101.0, 101.0]);
        assert_eq!(g.backfilled, 0);
    }

    #[test]
    fn resampling_a_grid_is_idempotent() {
        let s = spec((9, 0), (10, 0), 300);
        let grid = s.grid_times(date());
        let ticks: Vec<TickRecord> = grid
            .iter()
            .enumerate()
            .map(|(k, &t)| tick(t, 100.0 + k as f64 * 0.25))
            .collect();
        let g = sample_last_tick(&ticks, date(), &s).unwrap();
        let expected: Vec<f64> = ticks.iter().map(|t| t.price).collect();
        assert_eq!(g.prices, expected);
        assert_eq!(g.trade_fraction, 1.0);
    }

    #[test]
    fn trade_fraction_counts_five_minute_bins() {
        // 20 bins of 5 minutes; trades in 11 of them.
        let s = spec((9, 0), (10, 40), 60);
        let ticks: Vec<TickRecord> = (0..11).map(|b| tick(at(9, 0, 30) + Duration::minutes(5 * b), 100.0)).collect();
        let g = sample_last_tick(&ticks, date(), &s).unwrap();
        assert_eq!(g.trade_fraction, 0.55);
    }

    #[test]
    fn calendar_rules() {
        let mut cal = TradingCalendar::default();
        cal.excluded_dates.insert(date());
        assert!(cal.is_excluded(date()));
        assert!(cal.is_weekend(NaiveDate::from_ymd_opt(2017, 3, 18).unwrap()));
        assert!(!cal.is_weekend(date()));
        cal.low_trade_threshold = 0.0;
        assert!(cal.validate().is_err());
    }

    #[test]
    fn date_lists() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, b"date\n2017-12-25\n# holiday\n\n2018-01-01 # new year\n").unwrap();
        let dates = read_date_list(f.path()).unwrap();
        assert_eq!(dates.len(), 2);
        std::io::Write::write_all(&mut f, b"12/26/2017\n").unwrap();
        assert!(read_date_list(f.path()).is_err());
    }
}
