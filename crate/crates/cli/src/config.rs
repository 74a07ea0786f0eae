//! Run configuration: a TOML file plus command-line overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use chrono_tz::Tz;
use cojump::bootstrap::BootstrapConfig;
use cojump::events::{AnnouncementCalendar, Group, Window};
use cojump::jumps::DetectionConfig;
use cojump::jwc::{JwcConfig, SlowSpacing};
use cojump::market_data::{read_date_list, SessionSpec, TickSchema, TradingCalendar};
use cojump::modwt::{Boundary, FilterPair};
use cojump::pipeline::PipelineConfig;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    instruments: Vec<String>,
    #[serde(default)]
    pairs: Vec<Vec<String>>,
    #[serde(default)]
    tuples: Vec<Vec<String>>,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
    session: RawSession,
    #[serde(default)]
    calendar: RawCalendar,
    #[serde(default)]
    ticks: Vec<RawTicks>,
    #[serde(default)]
    tick_schema: TickSchema,
    #[serde(default)]
    detection: RawFilter,
    #[serde(default)]
    jwc: RawJwc,
    #[serde(default)]
    bootstrap: RawBootstrap,
    #[serde(default)]
    announcements: Vec<RawAnnouncements>,
    #[serde(default)]
    report: RawReport,
    simulate: Option<RawSimulate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSession {
    start: String,
    end: String,
    timezone: String,
    #[serde(default = "default_interval")]
    interval_seconds: u32,
}

fn default_interval() -> u32 {
    300
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawCalendar {
    holiday_files: Vec<PathBuf>,
    excluded_dates: Vec<String>,
    exclude_weekends: bool,
    low_trade_threshold: f64,
}

impl Default for RawCalendar {
    fn default() -> Self {
        let c = TradingCalendar::default();
        RawCalendar {
            holiday_files: Vec::new(),
            excluded_dates: Vec::new(),
            exclude_weekends: c.exclude_weekends,
            low_trade_threshold: c.low_trade_threshold,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTicks {
    path: PathBuf,
    instrument: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawFilter {
    wavelet: String,
    boundary: String,
}

impl Default for RawFilter {
    fn default() -> Self {
        RawFilter {
            wavelet: "haar".into(),
            boundary: "reflecting".into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSpacing {
    Fixed(usize),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawJwc {
    c_n: f64,
    fast_spacing: usize,
    slow_spacing: RawSpacing,
    levels: Option<usize>,
    wavelet: String,
    boundary: String,
}

impl Default for RawJwc {
    fn default() -> Self {
        RawJwc {
            c_n: 1.0,
            fast_spacing: 1,
            slow_spacing: RawSpacing::Named("auto".into()),
            levels: None,
            wavelet: "d4".into(),
            boundary: "reflecting".into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawBootstrap {
    replications: usize,
    alpha: f64,
}

impl Default for RawBootstrap {
    fn default() -> Self {
        let b = BootstrapConfig::default();
        RawBootstrap {
            replications: b.replications,
            alpha: b.alpha,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnouncements {
    name: String,
    path: PathBuf,
    timezone: Option<String>,
    /// `[start, end]` minutes relative to each announcement.
    #[serde(default = "default_windows")]
    windows: Vec<[i64; 2]>,
}

fn default_windows() -> Vec<[i64; 2]> {
    vec![[0, 30]]
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawReport {
    histogram_bin_minutes: u32,
}

impl Default for RawReport {
    fn default() -> Self {
        RawReport {
            histogram_bin_minutes: 30,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    scenario: PathBuf,
}

#[derive(Debug, Clone)]
pub struct TickSource {
    pub path: PathBuf,
    pub instrument: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AnnouncementSource {
    pub name: String,
    pub path: PathBuf,
    pub timezone: Tz,
    pub windows: Vec<Window>,
}

impl AnnouncementSource {
    pub fn load(&self) -> Result<AnnouncementCalendar> {
        let events = cojump::events::read_announcements(&self.path)?;
        Ok(AnnouncementCalendar::new(&self.name, self.timezone, events, self.windows.clone())?)
    }
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub replications: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Validated configuration with paths resolved against the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Raw bytes of the config file, hashed into the report manifest.
    pub source: Vec<u8>,
    pub instruments: Vec<String>,
    pub pairs: Vec<Group>,
    pub tuples: Vec<Group>,
    pub session: SessionSpec,
    pub holiday_files: Vec<PathBuf>,
    pub calendar: TradingCalendar,
    pub ticks: Vec<TickSource>,
    pub tick_schema: TickSchema,
    pub pipeline: PipelineConfig,
    pub announcements: Vec<AnnouncementSource>,
    pub histogram_bin_minutes: u32,
    pub scenario: Option<PathBuf>,
    pub output: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_time(field: &str, raw: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(raw, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(raw, "%H:%M"))
        .map_err(|_| config_err(format!("session.{field}: invalid time '{raw}'")))
}

fn parse_tz(raw: &str) -> Result<Tz> {
    raw.parse().map_err(|_| config_err(format!("unknown timezone '{raw}'")))
}

fn group(kind: &str, members: &[String], instruments: &[String]) -> Result<Group> {
    let distinct: BTreeSet<&String> = members.iter().collect();
    if distinct.len() != members.len() {
        return Err(config_err(format!("{kind} {} repeats an instrument", members.join("-"))));
    }
    if let Some(m) = members.iter().find(|m| !instruments.contains(m)) {
        return Err(config_err(format!("{kind} {} references unknown instrument '{m}'", members.join("-"))));
    }
    Ok(Group::new(members.iter().cloned()))
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let source = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&source).map_err(|_| config_err(format!("{}: not UTF-8", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(text, base, overrides).map(|mut c| {
            c.source = source;
            c
        })
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path, overrides: &Overrides) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(format!("config: {}", e.message())))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        let instruments = raw.instruments;
        if instruments.is_empty() {
            return Err(config_err("no instruments declared"));
        }
        let distinct: BTreeSet<&String> = instruments.iter().collect();
        if distinct.len() != instruments.len() || instruments.iter().any(|i| i.is_empty() || i.contains('-')) {
            return Err(config_err("instrument names must be unique, non-empty and free of '-'"));
        }
        let mut pairs = Vec::new();
        for p in &raw.pairs {
            if p.len() != 2 {
                return Err(config_err(format!("pair {} must have two members", p.join("-"))));
            }
            pairs.push(group("pair", p, &instruments)?);
        }
        let mut tuples = Vec::new();
        for t in &raw.tuples {
            if t.len() < 3 {
                return Err(config_err(format!("tuple {} must have at least three members", t.join("-"))));
            }
            tuples.push(group("tuple", t, &instruments)?);
        }

        let tz = parse_tz(&raw.session.timezone)?;
        let session = SessionSpec::new(
            parse_time("start", &raw.session.start)?,
            parse_time("end", &raw.session.end)?,
            tz,
            raw.session.interval_seconds,
        )?;

        let mut calendar = TradingCalendar {
            exclude_weekends: raw.calendar.exclude_weekends,
            low_trade_threshold: raw.calendar.low_trade_threshold,
            ..TradingCalendar::default()
        };
        for d in &raw.calendar.excluded_dates {
            let date = chrono::NaiveDate::parse_from_str(d, "%Y-%m-%d")
                .map_err(|_| config_err(format!("calendar.excluded_dates: invalid date '{d}'")))?;
            calendar.excluded_dates.insert(date);
        }
        calendar.validate()?;

        let detection = DetectionConfig {
            filters: FilterPair::by_name(&raw.detection.wavelet)?,
            boundary: raw.detection.boundary.parse::<Boundary>()?,
        };
        let slow_spacing = match raw.jwc.slow_spacing {
            RawSpacing::Fixed(g) => SlowSpacing::Fixed(g),
            RawSpacing::Named(s) if s == "auto" => SlowSpacing::Auto,
            RawSpacing::Named(s) => return Err(config_err(format!("jwc.slow_spacing: expected integer or \"auto\", got '{s}'"))),
        };
        let jwc = JwcConfig {
            c_n: raw.jwc.c_n,
            fast_spacing: raw.jwc.fast_spacing,
            slow_spacing,
            levels: raw.jwc.levels,
            filters: FilterPair::by_name(&raw.jwc.wavelet)?,
            boundary: raw.jwc.boundary.parse::<Boundary>()?,
        };
        jwc.validate(session.intervals())?;
        let bootstrap = BootstrapConfig {
            replications: overrides.replications.unwrap_or(raw.bootstrap.replications),
            alpha: overrides.alpha.unwrap_or(raw.bootstrap.alpha),
            jwc,
        };
        bootstrap.validate()?;

        let mut announcements = Vec::new();
        for a in &raw.announcements {
            if a.name.is_empty() || announcements.iter().any(|b: &AnnouncementSource| b.name == a.name) {
                return Err(config_err("announcement calendars need unique, non-empty names"));
            }
            let windows: Vec<Window> = a.windows.iter().map(|w| Window::minutes(w[0], w[1])).collect();
            if windows.is_empty() || windows.iter().any(|w| w.end <= w.start) {
                return Err(config_err(format!("announcements '{}': windows must be non-empty", a.name)));
            }
            announcements.push(AnnouncementSource {
                name: a.name.clone(),
                path: resolve(&a.path),
                timezone: a.timezone.as_deref().map(parse_tz).transpose()?.unwrap_or(tz),
                windows,
            });
        }
        // Fails early on a bin width that does not divide the session.
        cojump::events::intraday_histogram(&[], session.start(), session.end(), raw.report.histogram_bin_minutes)?;

        let output = match &overrides.output {
            Some(p) => p.clone(),
            None => resolve(raw.output.as_deref().unwrap_or(Path::new("out"))),
        };
        Ok(RunConfig {
            source: text.as_bytes().to_vec(),
            instruments,
            pairs,
            tuples,
            session,
            holiday_files: raw.calendar.holiday_files.iter().map(|p| resolve(p)).collect(),
            calendar,
            ticks: raw
                .ticks
                .iter()
                .map(|t| TickSource {
                    path: resolve(&t.path),
                    instrument: t.instrument.clone(),
                })
                .collect(),
            tick_schema: raw.tick_schema,
            pipeline: PipelineConfig {
                detection,
                bootstrap,
                seed: overrides.seed.unwrap_or(raw.seed),
            },
            announcements,
            histogram_bin_minutes: raw.report.histogram_bin_minutes,
            scenario: raw.simulate.map(|s| resolve(&s.scenario)),
            output,
        })
    }

    /// Adds dates from the holiday files to the excluded set.
    pub fn load_holidays(&mut self) -> Result<()> {
        for path in &self.holiday_files {
            self.calendar.excluded_dates.extend(read_date_list(path)?);
        }
        Ok(())
    }

    /// Groups reported on: configured pairs, then tuples.
    pub fn groups(&self) -> Vec<Group> {
        self.pairs.iter().chain(&self.tuples).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
instruments = ["a", "b"]
pairs = [["a", "b"]]

[session]
start = "07:00"
end = "16:00"
timezone = "America/Chicago"
"#;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("/cfg"), &Overrides::default())
    }

    #[test]
    fn defaults_and_resolution() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.session.intervals(), 108);
        assert_eq!(c.pipeline.bootstrap.replications, 999);
        assert_eq!(c.output, Path::new("/cfg/out"));
        assert_eq!(c.histogram_bin_minutes, 30);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(9),
            alpha: Some(0.01),
            replications: Some(199),
            output: Some("elsewhere".into()),
        };
        let c = RunConfig::parse(MINIMAL, Path::new("/cfg"), &o).unwrap();
        assert_eq!(c.pipeline.seed, 9);
        assert_eq!(c.pipeline.bootstrap.alpha, 0.01);
        assert_eq!(c.pipeline.bootstrap.replications, 199);
        assert_eq!(c.output, Path::new("elsewhere"));
    }

    #[test]
    fn rejects_unknown_pair_member() {
        let text = MINIMAL.replace(r#"[["a", "b"]]"#, r#"[["a", "c"]]"#);
        let err = parse(&text).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("'c'"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert_eq!(parse(&format!("{MINIMAL}\n[jwc]\nbogus = 1\n")).unwrap_err().exit_code(), 3);
        assert_eq!(parse(&format!("{MINIMAL}\n[jwc]\nslow_spacing = \"often\"\n")).unwrap_err().exit_code(), 3);
        assert_eq!(parse(&format!("{MINIMAL}\n[report]\nhistogram_bin_minutes = 7\n")).unwrap_err().exit_code(), 3);
        assert_eq!(parse(&MINIMAL.replace("America/Chicago", "Mars/Olympus")).unwrap_err().exit_code(), 3);
    }
}
