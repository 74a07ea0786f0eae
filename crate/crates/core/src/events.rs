//! Event-study analytics over daily decompositions: co-jump shares,
//! correlation-impact regression, announcement logit, intraday histograms
//! and level-shift/rotation classification.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use chrono_tz::Tz;

use crate::bootstrap::Classification;
use crate::error::{Error, Result};
use crate::jwc::correlation;

/// Ordered set of instruments analysed together (a pair or a tuple).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group {
    pub members: Vec<String>,
}

impl Group {
    pub fn new<S: Into<String>>(members: impl IntoIterator<Item = S>) -> Self {
        Group {
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Every unordered pair of members, in member order.
    pub fn pairs(&self) -> Vec<Group> {
        let m = &self.members;
        (0..m.len())
            .flat_map(|a| (a + 1..m.len()).map(move |b| Group::new([m[a].clone(), m[b].clone()])))
            .collect()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.members.join("-"))
    }
}

/// A common jump of all group members at one grid interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CoJumpRecord {
    pub index: usize,
    /// Left endpoint of the return interval, session wall-clock time.
    pub time: NaiveDateTime,
    /// Signed jump sizes, one per member.
    pub sizes: Vec<f64>,
}

impl CoJumpRecord {
    pub fn abs_product(&self) -> f64 {
        self.sizes.iter().map(|s| s.abs()).product()
    }
}

/// One day of one pair after estimation and testing.
#[derive(Debug, Clone, PartialEq)]
pub struct DayDecomposition {
    pub date: NaiveDate,
    pub pair: Group,
    /// Realized covariance of raw returns, then the two variances.
    pub qv: f64,
    pub qv_diag: [f64; 2],
    /// Selected continuous covariance and the matching variances.
    pub ic: f64,
    pub ic_diag: [f64; 2],
    /// Co-jump variation; zero unless the day is classified `co_jump`.
    pub cj: f64,
    pub events: Vec<CoJumpRecord>,
    pub classification: Classification,
    pub z: f64,
    pub p_value: f64,
}

impl DayDecomposition {
    pub fn corr_qv(&self) -> Option<f64> {
        correlation(self.qv, self.qv_diag[0], self.qv_diag[1]).map(|c| c.value)
    }

    pub fn corr_ic(&self) -> Option<f64> {
        correlation(self.ic, self.ic_diag[0], self.ic_diag[1]).map(|c| c.value)
    }
}

/// Co-jump activity of a group on one day: `active` marks a significant
/// co-jump (or multi-jump) day and `events` lists its common jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDay {
    pub date: NaiveDate,
    pub group: Group,
    pub active: bool,
    pub events: Vec<CoJumpRecord>,
}

impl From<&DayDecomposition> for GroupDay {
    fn from(d: &DayDecomposition) -> Self {
        let active = d.classification == Classification::CoJump;
        GroupDay {
            date: d.date,
            group: d.pair.clone(),
            active,
            events: if active { d.events.clone() } else { Vec::new() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CjQvRow {
    pub pair: Group,
    pub days: usize,
    pub days_with_cj: usize,
    pub total_qv: f64,
    /// Mean over days with `QV != 0` of `100 * CJ / QV`.
    pub pct_cj_qv: f64,
}

/// Per pair: days with `CJ != 0`, summed QV and the average daily CJ share.
/// Rows follow the first appearance of each pair.
pub fn cj_qv_summary(decomps: &[DayDecomposition]) -> Vec<CjQvRow> {
    let mut order: Vec<Group> = Vec::new();
    let mut acc: BTreeMap<Group, (usize, usize, f64, f64, usize)> = BTreeMap::new();
    for d in decomps {
        let e = acc.entry(d.pair.clone()).or_insert_with(|| {
            order.push(d.pair.clone());
            (0, 0, 0.0, 0.0, 0)
        });
        e.0 += 1;
        if d.cj != 0.0 {
            e.1 += 1;
        }
        e.2 += d.qv;
        if d.qv != 0.0 {
            e.3 += 100.0 * d.cj / d.qv;
            e.4 += 1;
        }
    }
    order
        .into_iter()
        .map(|pair| {
            let (days, with_cj, qv, ratio_sum, ratio_days) = acc[&pair];
            CjQvRow {
                pair,
                days,
                days_with_cj: with_cj,
                total_qv: qv,
                pct_cj_qv: if ratio_days == 0 { 0.0 } else { ratio_sum / ratio_days as f64 },
            }
        })
        .collect()
}

/// OLS of `y` on `x` with intercept and a White (HC0) Wald test of
/// `alpha = 0, beta = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    /// HC0 covariance of `(alpha, beta)`, row-major.
    pub cov: [[f64; 2]; 2],
    pub wald: f64,
    /// Upper tail of chi-square with two degrees of freedom.
    pub wald_p: f64,
    pub observations: usize,
}

fn inverse_2x2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.is_finite() && det.abs() > f64::MIN_POSITIVE) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul_2x2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Regression of total correlation (`y`) on continuous correlation (`x`).
pub fn correlation_impact_regression(y: &[f64], x: &[f64]) -> Result<RegressionFit> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    let n = y.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("regression needs at least 3 days, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("regressor has zero variance".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    let resid: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - alpha - beta * a).collect();
    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if sst > 0.0 {
        1.0 - ssr / sst
    } else if ssr == 0.0 {
        1.0
    } else {
        f64::NAN
    };

    let sum_x: f64 = x.iter().sum();
    let sum_xx: f64 = x.iter().map(|v| v * v).sum();
    let bread = inverse_2x2([[nf, sum_x], [sum_x, sum_xx]])
        .ok_or_else(|| Error::Numerical("singular design matrix".into()))?;
    let mut meat = [[0.0; 2]; 2];
    for (xi, e) in x.iter().zip(&resid) {
        let e2 = e * e;
        meat[0][0] += e2;
        meat[0][1] += e2 * xi;
        meat[1][1] += e2 * xi * xi;
    }
    meat[1][0] = meat[0][1];
    let cov = mul_2x2(mul_2x2(bread, meat), bread);

    let d = [alpha, beta - 1.0];
    let wald = if d == [0.0, 0.0] {
        0.0
    } else {
        match inverse_2x2(cov) {
            Some(inv) => {
                d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1])
            }
            None => f64::INFINITY,
        }
    };
    Ok(RegressionFit {
        alpha,
        beta,
        r_squared,
        cov,
        wald,
        wald_p: (-wald / 2.0).exp(),
        observations: n,
    })
}

/// Logistic regression of a daily co-jump indicator on a news indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitFit {
    pub beta0: f64,
    pub beta1: f64,
    pub se_beta0: f64,
    pub se_beta1: f64,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    /// McFadden's `1 - l / l0`.
    pub pseudo_r2: f64,
    pub iterations: usize,
    pub observations: usize,
}

pub const LOGIT_TOLERANCE: f64 = 1e-10;
pub const LOGIT_MAX_ITER: usize = 100;

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Fits `P(y = 1) = 1 / (1 + exp(-(b0 + b1 news)))` by iteratively
/// reweighted least squares, stopping when the log-likelihood changes by
/// less than [`LOGIT_TOLERANCE`] or after [`LOGIT_MAX_ITER`] iterations.
///
/// With a binary regressor the maximum likelihood estimate exists only when
/// both outcomes occur in both news groups; otherwise the data are
/// (quasi-)separated and an error is returned.
pub fn announcement_logit(y: &[bool], news: &[bool]) -> Result<LogitFit> {
    if y.len() != news.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: news.len(),
        });
    }
    let mut cells = [[0usize; 2]; 2];
    for (&yi, &ni) in y.iter().zip(news) {
        cells[usize::from(ni)][usize::from(yi)] += 1;
    }
    for (group, name) in [(0, "non-news"), (1, "news")] {
        let [zeros, ones] = cells[group];
        if zeros + ones == 0 {
            return Err(Error::Separation(format!("no {name} days; the news indicator is constant")));
        }
        if zeros == 0 || ones == 0 {
            return Err(Error::Separation(format!(
                "co-jump outcome is constant on {name} days ({ones} of {})",
                zeros + ones
            )));
        }
    }

    let n = y.len();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
    let xf: Vec<f64> = news.iter().map(|&v| f64::from(u8::from(v))).collect();
    let loglik = |b: [f64; 2]| -> f64 {
        yf.iter()
            .zip(&xf)
            .map(|(yi, xi)| {
                let eta = b[0] + b[1] * xi;
                yi * eta - softplus(eta)
            })
            .sum()
    };
    let information = |b: [f64; 2]| -> ([[f64; 2]; 2], [f64; 2]) {
        let mut h = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for (yi, xi) in yf.iter().zip(&xf) {
            let p = sigmoid(b[0] + b[1] * xi);
            let w = p * (1.0 - p);
            g[0] += yi - p;
            g[1] += (yi - p) * xi;
            h[0][0] += w;
            h[0][1] += w * xi;
            h[1][1] += w * xi * xi;
        }
        h[1][0] = h[0][1];
        (h, g)
    };

    let mut b = [0.0; 2];
    let mut ll = loglik(b);
    let mut iterations = 0;
    while iterations < LOGIT_MAX_ITER {
        iterations += 1;
        let (h, g) = information(b);
        let inv = inverse_2x2(h).ok_or_else(|| Error::Numerical("singular logit information matrix".into()))?;
        b[0] += inv[0][0] * g[0] + inv[0][1] * g[1];
        b[1] += inv[1][0] * g[0] + inv[1][1] * g[1];
        let next = loglik(b);
        if !next.is_finite() {
            return Err(Error::Numerical("logit log-likelihood diverged".into()));
        }
        let change = (next - ll).abs();
        ll = next;
        if change < LOGIT_TOLERANCE {
            break;
        }
    }
    let (h, _) = information(b);
    let inv = inverse_2x2(h).ok_or_else(|| Error::Numerical("singular logit information matrix".into()))?;
    let rate = yf.iter().sum::<f64>() / n as f64;
    let ll0 = n as f64 * (rate * rate.ln() + (1.0 - rate) * (1.0 - rate).ln());
    Ok(LogitFit {
        beta0: b[0],
        beta1: b[1],
        se_beta0: inv[0][0].sqrt(),
        se_beta1: inv[1][1].sqrt(),
        log_likelihood: ll,
        null_log_likelihood: ll0,
        pseudo_r2: 1.0 - ll / ll0,
        iterations,
        observations: n,
    })
}

/// Window relative to an announcement instant, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Duration,
    pub end: Duration,
}

impl Window {
    pub fn minutes(start: i64, end: i64) -> Self {
        Window {
            start: Duration::minutes(start),
            end: Duration::minutes(end),
        }
    }
}

/// Scheduled announcements of one institution with their attribution
/// windows, in wall-clock time of `timezone`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnouncementCalendar {
    name: String,
    timezone: Tz,
    events: BTreeMap<NaiveDate, Vec<NaiveTime>>,
    windows: Vec<Window>,
}

impl AnnouncementCalendar {
    pub fn new(
        name: impl Into<String>,
        timezone: Tz,
        events: impl IntoIterator<Item = NaiveDateTime>,
        windows: Vec<Window>,
    ) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::InvalidConfig("announcement calendar needs at least one window".into()));
        }
        if let Some(w) = windows.iter().find(|w| w.end < w.start) {
            return Err(Error::InvalidConfig(format!(
                "announcement window ends before it starts ({} to {} minutes)",
                w.start.num_minutes(),
                w.end.num_minutes()
            )));
        }
        let mut map: BTreeMap<NaiveDate, Vec<NaiveTime>> = BTreeMap::new();
        for t in events {
            map.entry(t.date()).or_default().push(t.time());
        }
        for times in map.values_mut() {
            times.sort();
            times.dedup();
        }
        Ok(AnnouncementCalendar {
            name: name.into(),
            timezone,
            events: map,
            windows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn timezone(&self) -> Tz {
        self.timezone
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn is_announcement_day(&self, date: NaiveDate) -> bool {
        self.events.contains_key(&date)
    }

    pub fn announcement_days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.events.keys().copied()
    }

    /// Most common announcement time of day (earliest on ties). Days without
    /// an announcement are examined with windows anchored here.
    pub fn anchor_time(&self) -> Option<NaiveTime> {
        let mut counts: BTreeMap<NaiveTime, usize> = BTreeMap::new();
        for t in self.events.values().flatten() {
            *counts.entry(*t).or_default() += 1;
        }
        let max = counts.values().copied().max()?;
        counts.into_iter().find(|&(_, c)| c == max).map(|(t, _)| t)
    }

    /// Absolute `[start, end)` windows examined on `date`.
    pub fn windows_on(&self, date: NaiveDate) -> Vec<(NaiveDateTime, NaiveDateTime)> {
        let anchors: Vec<NaiveTime> = match self.events.get(&date) {
            Some(times) => times.clone(),
            None => self.anchor_time().into_iter().collect(),
        };
        anchors
            .iter()
            .flat_map(|&t| {
                let at = date.and_time(t);
                self.windows.iter().map(move |w| (at + w.start, at + w.end))
            })
            .collect()
    }

    /// Whether `t`, a wall-clock time in `tz`, falls inside a window of its
    /// day. Timezones must match exactly.
    pub fn contains(&self, t: NaiveDateTime, tz: Tz) -> Result<bool> {
        if tz != self.timezone {
            return Err(Error::TimezoneMismatch {
                expected: self.timezone.name().to_string(),
                found: tz.name().to_string(),
            });
        }
        Ok(self.windows_on(t.date()).iter().any(|&(a, b)| a <= t && t < b))
    }
}

/// Reads announcement instants from a CSV with `date` (`YYYY-MM-DD`) and
/// `time` (`HH:MM` or `HH:MM:SS`) columns.
pub fn read_announcements(path: &Path) -> Result<Vec<NaiveDateTime>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::csv(path, e),
        })?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("{}: missing column '{name}'", path.display())))
    };
    let (dc, tc) = (col("date")?, col("time")?);
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = || Error::InvalidInput(format!("{}: line {}: invalid date/time", path.display(), row + 2));
        let date = NaiveDate::parse_from_str(rec.get(dc).ok_or_else(bad)?, "%Y-%m-%d").map_err(|_| bad())?;
        let raw = rec.get(tc).ok_or_else(bad)?;
        let time = NaiveTime::parse_from_str(raw, "%H:%M:%S")
            .or_else(|_| NaiveTime::parse_from_str(raw, "%H:%M"))
            .map_err(|_| bad())?;
        out.push(date.and_time(time));
    }
    Ok(out)
}

/// 1 when any co-jump time (wall clock in `tz`) falls inside a window of the
/// calendar on that day.
pub fn cojump_window_indicator(times: &[NaiveDateTime], tz: Tz, calendar: &AnnouncementCalendar) -> Result<bool> {
    for &t in times {
        if calendar.contains(t, tz)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramBin {
    pub start: NaiveTime,
    pub count: usize,
}

/// Counts event times in `[start + k w, start + (k + 1) w)` bins over the
/// session.
pub fn intraday_histogram(
    times: &[NaiveTime],
    session_start: NaiveTime,
    session_end: NaiveTime,
    bin_minutes: u32,
) -> Result<Vec<HistogramBin>> {
    let length = (session_end - session_start).num_seconds();
    let width = i64::from(bin_minutes) * 60;
    if width == 0 || length <= 0 || length % width != 0 {
        return Err(Error::InvalidConfig(format!(
            "histogram bin of {bin_minutes} minutes does not divide the session"
        )));
    }
    let mut bins: Vec<HistogramBin> = (0..length / width)
        .map(|k| HistogramBin {
            start: session_start + Duration::seconds(k * width),
            count: 0,
        })
        .collect();
    for &t in times {
        let offset = (t - session_start).num_seconds();
        if offset < 0 || offset >= length {
            return Err(Error::InvalidInput(format!("event at {t} lies outside the session")));
        }
        bins[(offset / width) as usize].count += 1;
    }
    Ok(bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShiftRotationLabel {
    UpShift,
    DownShift,
    Rotation,
    None,
}

impl ShiftRotationLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftRotationLabel::UpShift => "up_shift",
            ShiftRotationLabel::DownShift => "down_shift",
            ShiftRotationLabel::Rotation => "rotation",
            ShiftRotationLabel::None => "none",
        }
    }
}

impl fmt::Display for ShiftRotationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Same-sign jumps across all members shift the curve; mixed signs rotate
/// it.
pub fn classify_shift_rotation(sizes: &[f64]) -> Result<ShiftRotationLabel> {
    if sizes.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 jump sizes, got {}", sizes.len())));
    }
    if sizes.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::InvalidInput("a co-jump tuple needs non-zero finite sizes".into()));
    }
    Ok(if sizes.iter().all(|&s| s > 0.0) {
        ShiftRotationLabel::UpShift
    } else if sizes.iter().all(|&s| s < 0.0) {
        ShiftRotationLabel::DownShift
    } else {
        ShiftRotationLabel::Rotation
    })
}

/// Label of a day: that of its dominant event (largest product of absolute
/// sizes, earliest on ties), or `None` without events.
pub fn day_label(events: &[CoJumpRecord]) -> Result<ShiftRotationLabel> {
    let mut best: Option<&CoJumpRecord> = None;
    for e in events {
        if best.map_or(true, |b| e.abs_product() > b.abs_product()) {
            best = Some(e);
        }
    }
    match best {
        Some(e) => classify_shift_rotation(&e.sizes),
        None => Ok(ShiftRotationLabel::None),
    }
}

/// Labelled day of a group for the shift/rotation table.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDay {
    pub date: NaiveDate,
    pub group: Group,
    pub label: ShiftRotationLabel,
    pub announcement: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRotationRow {
    pub group: Group,
    pub announcement: bool,
    pub rotations: usize,
    pub up_shifts: usize,
    pub down_shifts: usize,
    pub days: usize,
    /// Denominator of the percentages: announcement or non-announcement
    /// day count.
    pub sample_days: usize,
}

impl ShiftRotationRow {
    fn pct(&self, count: usize) -> f64 {
        if self.sample_days == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.sample_days as f64
        }
    }

    pub fn pct_rotations(&self) -> f64 {
        self.pct(self.rotations)
    }

    pub fn pct_up_shifts(&self) -> f64 {
        self.pct(self.up_shifts)
    }

    pub fn pct_down_shifts(&self) -> f64 {
        self.pct(self.down_shifts)
    }

    pub fn pct_days(&self) -> f64 {
        self.pct(self.days)
    }
}

/// Rotation and level-shift counts per group, first on announcement days
/// then on the rest, with percentages of the respective day counts.
pub fn shift_rotation_table(
    groups: &[Group],
    labels: &[LabeledDay],
    announcement_days: usize,
    non_announcement_days: usize,
) -> Vec<ShiftRotationRow> {
    let mut rows = Vec::with_capacity(2 * groups.len());
    for announcement in [true, false] {
        for g in groups {
            let mut row = ShiftRotationRow {
                group: g.clone(),
                announcement,
                rotations: 0,
                up_shifts: 0,
                down_shifts: 0,
                days: 0,
                sample_days: if announcement { announcement_days } else { non_announcement_days },
            };
            for l in labels.iter().filter(|l| &l.group == g && l.announcement == announcement) {
                match l.label {
                    ShiftRotationLabel::Rotation => row.rotations += 1,
                    ShiftRotationLabel::UpShift => row.up_shifts += 1,
                    ShiftRotationLabel::DownShift => row.down_shifts += 1,
                    ShiftRotationLabel::None => continue,
                }
                row.days += 1;
            }
            rows.push(row);
        }
    }
    rows
}
