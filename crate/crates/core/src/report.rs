//! CSV layouts of decomposition outputs and the event-study tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use crate::bootstrap::Classification;
use crate::error::{Error, Result};
use crate::events::{
    announcement_logit, cj_qv_summary, cojump_window_indicator, correlation_impact_regression, day_label,
    intraday_histogram, shift_rotation_table, AnnouncementCalendar, CjQvRow, CoJumpRecord, DayDecomposition, Group,
    HistogramBin, LabeledDay, LogitFit, RegressionFit, ShiftRotationRow,
};
use crate::market_data::{SessionSpec, DATE_FORMAT, TIME_FORMAT};
use crate::pipeline::DecompositionRun;

const SIZE_SEPARATOR: char = ';';

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}

fn write_row<W: Write, I, T>(w: &mut csv::Writer<W>, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| Error::csv("<output>", e))
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<output>", e))
}

fn date_str(d: NaiveDate) -> String {
    d.format(DATE_FORMAT).to_string()
}

fn f(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, f)
}

/// `date,pair,qv,qv_11,qv_22,ic,ic_11,ic_22,cj,corr_qv,corr_ic,z,p_value,classification`
pub fn write_decomposition_csv(run: &DecompositionRun, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(
        &mut w,
        [
            "date", "pair", "qv", "qv_11", "qv_22", "ic", "ic_11", "ic_22", "cj", "corr_qv", "corr_ic", "z", "p_value",
            "classification",
        ],
    )?;
    for day in &run.days {
        for d in &day.pairs {
            write_row(
                &mut w,
                [
                    date_str(d.date),
                    d.pair.to_string(),
                    f(d.qv),
                    f(d.qv_diag[0]),
                    f(d.qv_diag[1]),
                    f(d.ic),
                    f(d.ic_diag[0]),
                    f(d.ic_diag[1]),
                    f(d.cj),
                    opt(d.corr_qv()),
                    opt(d.corr_ic()),
                    f(d.z),
                    f(d.p_value),
                    d.classification.to_string(),
                ],
            )?;
        }
    }
    finish(w)
}

/// `date,instrument,index,grid_time,size,threshold`
pub fn write_jumps_csv(run: &DecompositionRun, grid: impl Fn(NaiveDate, usize) -> NaiveDateTime, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["date", "instrument", "index", "grid_time", "size", "threshold"])?;
    for day in &run.days {
        for (name, series) in day.instruments.iter().zip(&day.jumps) {
            for &i in series.indices() {
                write_row(
                    &mut w,
                    [
                        date_str(day.date),
                        name.clone(),
                        i.to_string(),
                        grid(day.date, i).format(TIME_FORMAT).to_string(),
                        f(series.sizes()[i]),
                        f(series.threshold()),
                    ],
                )?;
            }
        }
    }
    finish(w)
}

/// One common jump of a pair or tuple, as stored in `cojumps.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoJumpRow {
    pub date: NaiveDate,
    pub group: Group,
    pub record: CoJumpRecord,
    /// Whether the day is a significant co-jump (pairs) or multi-jump
    /// (tuples) day.
    pub significant: bool,
}

fn cojump_rows(run: &DecompositionRun) -> Vec<CoJumpRow> {
    let mut rows = Vec::new();
    for day in &run.days {
        for d in &day.pairs {
            let significant = d.classification == Classification::CoJump;
            rows.extend(d.events.iter().map(|e| CoJumpRow {
                date: d.date,
                group: d.pair.clone(),
                record: e.clone(),
                significant,
            }));
        }
        for g in &day.tuples {
            rows.extend(g.events.iter().map(|e| CoJumpRow {
                date: g.date,
                group: g.group.clone(),
                record: e.clone(),
                significant: g.active,
            }));
        }
    }
    rows
}

/// `date,group,index,grid_time,sizes,significant`; sizes are `;`-separated
/// in member order.
pub fn write_cojumps_csv(run: &DecompositionRun, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["date", "group", "index", "grid_time", "sizes", "significant"])?;
    for r in cojump_rows(run) {
        let sizes: Vec<String> = r.record.sizes.iter().map(|s| f(*s)).collect();
        write_row(
            &mut w,
            [
                date_str(r.date),
                r.group.to_string(),
                r.record.index.to_string(),
                r.record.time.format(TIME_FORMAT).to_string(),
                sizes.join(&SIZE_SEPARATOR.to_string()),
                r.significant.to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `date,row,col,value` for the JWC matrix of every day.
pub fn write_ic_matrix_csv(run: &DecompositionRun, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["date", "row", "col", "value"])?;
    for day in &run.days {
        for (a, ra) in day.instruments.iter().enumerate() {
            for (b, rb) in day.instruments.iter().enumerate() {
                write_row(&mut w, [date_str(day.date), ra.clone(), rb.clone(), f(day.ic.get(a, b))])?;
            }
        }
    }
    finish(w)
}

/// `date,pair,z,p_value,rejected,classification,replications,alpha,seed,mean_z_star,var_z_star`
pub fn write_tests_csv(run: &DecompositionRun, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(
        &mut w,
        [
            "date", "pair", "z", "p_value", "rejected", "classification", "replications", "alpha", "seed",
            "mean_z_star", "var_z_star",
        ],
    )?;
    for day in &run.days {
        for (d, t) in day.pairs.iter().zip(&day.tests) {
            write_row(
                &mut w,
                [
                    date_str(day.date),
                    d.pair.to_string(),
                    f(t.z),
                    f(t.p_value),
                    t.rejected.to_string(),
                    t.classification.to_string(),
                    t.replications.to_string(),
                    f(t.alpha),
                    t.seed.to_string(),
                    f(t.mean_z_star),
                    f(t.var_z_star),
                ],
            )?;
        }
    }
    finish(w)
}

/// `date,error`
pub fn write_failures_csv(run: &DecompositionRun, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["date", "error"])?;
    for fail in &run.failures {
        write_row(&mut w, [date_str(fail.date), fail.error.clone()])?;
    }
    finish(w)
}

fn parse_group(label: &str) -> Group {
    Group::new(label.split('-'))
}

fn records_of(path: &Path, input: impl Read, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::InvalidInput(format!(
            "{}: unexpected header {}",
            path.display(),
            found.join(",")
        )));
    }
    reader
        .records()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

struct Fields<'a> {
    path: &'a Path,
    line: usize,
    rec: &'a csv::StringRecord,
}

impl Fields<'_> {
    fn bad(&self, what: &str) -> Error {
        Error::InvalidInput(format!("{}: line {}: invalid {what}", self.path.display(), self.line))
    }

    fn str(&self, i: usize) -> &str {
        self.rec.get(i).unwrap_or("")
    }

    fn num(&self, i: usize, what: &str) -> Result<f64> {
        self.str(i).parse().map_err(|_| self.bad(what))
    }

    fn date(&self, i: usize) -> Result<NaiveDate> {
        NaiveDate::parse_from_str(self.str(i), DATE_FORMAT).map_err(|_| self.bad("date"))
    }
}

/// Reads `decomposition.csv`; events are left empty.
pub fn read_decomposition_csv(path: &Path, input: impl Read) -> Result<Vec<DayDecomposition>> {
    let header = [
        "date", "pair", "qv", "qv_11", "qv_22", "ic", "ic_11", "ic_22", "cj", "corr_qv", "corr_ic", "z", "p_value",
        "classification",
    ];
    let mut out = Vec::new();
    for (k, rec) in records_of(path, input, &header)?.iter().enumerate() {
        let r = Fields { path, line: k + 2, rec };
        let pair = parse_group(r.str(1));
        if pair.len() != 2 {
            return Err(r.bad("pair"));
        }
        out.push(DayDecomposition {
            date: r.date(0)?,
            pair,
            qv: r.num(2, "qv")?,
            qv_diag: [r.num(3, "qv_11")?, r.num(4, "qv_22")?],
            ic: r.num(5, "ic")?,
            ic_diag: [r.num(6, "ic_11")?, r.num(7, "ic_22")?],
            cj: r.num(8, "cj")?,
            events: Vec::new(),
            z: r.num(11, "z")?,
            p_value: r.num(12, "p_value")?,
            classification: r.str(13).parse().map_err(|_| r.bad("classification"))?,
        });
    }
    Ok(out)
}

pub fn read_cojumps_csv(path: &Path, input: impl Read) -> Result<Vec<CoJumpRow>> {
    let header = ["date", "group", "index", "grid_time", "sizes", "significant"];
    let mut out = Vec::new();
    for (k, rec) in records_of(path, input, &header)?.iter().enumerate() {
        let r = Fields { path, line: k + 2, rec };
        let date = r.date(0)?;
        let group = parse_group(r.str(1));
        let time = chrono::NaiveTime::parse_from_str(r.str(3), TIME_FORMAT).map_err(|_| r.bad("grid_time"))?;
        let sizes = r
            .str(4)
            .split(SIZE_SEPARATOR)
            .map(|s| s.parse::<f64>().map_err(|_| r.bad("sizes")))
            .collect::<Result<Vec<_>>>()?;
        if sizes.len() != group.len() {
            return Err(r.bad("sizes"));
        }
        out.push(CoJumpRow {
            date,
            group,
            record: CoJumpRecord {
                index: r.str(2).parse().map_err(|_| r.bad("index"))?,
                time: date.and_time(time),
                sizes,
            },
            significant: r.str(5).parse().map_err(|_| r.bad("significant"))?,
        });
    }
    Ok(out)
}

/// Tables and histograms of one report run.
#[derive(Debug, Clone, Default)]
pub struct AnalysisReport {
    pub table3: Vec<CjQvRow>,
    pub table4: Vec<(Group, std::result::Result<RegressionFit, String>)>,
    pub table5: Vec<(String, Group, std::result::Result<LogitFit, String>)>,
    pub table6: Vec<(String, ShiftRotationRow)>,
    pub histogram: Vec<(Group, Vec<HistogramBin>)>,
}

/// Builds every table from decomposition outputs.
///
/// A group's day counts as a news co-jump day when it is significant and at
/// least one of its common jumps falls inside a calendar window of that day.
/// Days without an announcement are examined in windows at the calendar's
/// usual announcement time.
pub fn build_report(
    decomps: &[DayDecomposition],
    cojumps: &[CoJumpRow],
    groups: &[Group],
    calendars: &[AnnouncementCalendar],
    session: &SessionSpec,
    bin_minutes: u32,
) -> Result<AnalysisReport> {
    let mut report = AnalysisReport {
        table3: cj_qv_summary(decomps),
        ..AnalysisReport::default()
    };
    let pairs: Vec<&Group> = groups.iter().filter(|g| g.len() == 2).collect();
    for pair in &pairs {
        let (y, x): (Vec<f64>, Vec<f64>) = decomps
            .iter()
            .filter(|d| &d.pair == *pair)
            .filter_map(|d| Some((d.corr_qv()?, d.corr_ic()?)))
            .unzip();
        let fit = correlation_impact_regression(&y, &x).map_err(|e| e.to_string());
        report.table4.push(((*pair).clone(), fit));
    }

    let dates: BTreeSet<NaiveDate> = decomps.iter().map(|d| d.date).collect();
    let mut significant: BTreeMap<(&Group, NaiveDate), Vec<&CoJumpRecord>> = BTreeMap::new();
    for row in cojumps.iter().filter(|r| r.significant) {
        significant.entry((&row.group, row.date)).or_default().push(&row.record);
    }

    for cal in calendars {
        let news: Vec<bool> = dates.iter().map(|&d| cal.is_announcement_day(d)).collect();
        let announcement_days = news.iter().filter(|&&n| n).count();
        let mut labels = Vec::new();
        for g in groups {
            let mut y = Vec::with_capacity(dates.len());
            for (&date, &is_news) in dates.iter().zip(&news) {
                let mut in_window = Vec::new();
                for e in significant.get(&(g, date)).into_iter().flatten() {
                    if cojump_window_indicator(&[e.time], session.timezone(), cal)? {
                        in_window.push((*e).clone());
                    }
                }
                y.push(!in_window.is_empty());
                if !in_window.is_empty() {
                    labels.push(LabeledDay {
                        date,
                        group: g.clone(),
                        label: day_label(&in_window)?,
                        announcement: is_news,
                    });
                }
            }
            let fit = announcement_logit(&y, &news).map_err(|e| e.to_string());
            report.table5.push((cal.name().to_string(), g.clone(), fit));
        }
        for row in shift_rotation_table(groups, &labels, announcement_days, dates.len() - announcement_days) {
            report.table6.push((cal.name().to_string(), row));
        }
    }

    for g in groups {
        let times: Vec<_> = significant
            .iter()
            .filter(|((group, _), _)| *group == g)
            .flat_map(|(_, events)| events.iter().map(|e| e.time.time()))
            .collect();
        let bins = intraday_histogram(&times, session.start(), session.end(), bin_minutes)?;
        report.histogram.push((g.clone(), bins));
    }
    Ok(report)
}

/// `pair,days_with_cj,qv,pct_cj_qv`
pub fn write_table3(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["pair", "days_with_cj", "qv", "pct_cj_qv"])?;
    for r in &report.table3 {
        write_row(&mut w, [r.pair.to_string(), r.days_with_cj.to_string(), f(r.total_qv), f(r.pct_cj_qv)])?;
    }
    finish(w)
}

/// `pair,alpha,beta,r_squared`
pub fn write_table4(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["pair", "alpha", "beta", "r_squared"])?;
    for (g, fit) in &report.table4 {
        let cells = match fit {
            Ok(fit) => [f(fit.alpha), f(fit.beta), f(fit.r_squared)],
            Err(_) => Default::default(),
        };
        write_row(&mut w, [g.to_string(), cells[0].clone(), cells[1].clone(), cells[2].clone()])?;
    }
    finish(w)
}

/// `pair,wald,wald_p,observations,status` for the White-Wald test of
/// `alpha = 0, beta = 1`.
pub fn write_table4_wald(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["pair", "wald", "wald_p", "observations", "status"])?;
    for (g, fit) in &report.table4 {
        let row = match fit {
            Ok(fit) => [g.to_string(), f(fit.wald), f(fit.wald_p), fit.observations.to_string(), "ok".into()],
            Err(e) => [g.to_string(), String::new(), String::new(), String::new(), e.clone()],
        };
        write_row(&mut w, row)?;
    }
    finish(w)
}

/// `calendar,group,beta0,beta1,r_squared`
pub fn write_table5(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["calendar", "group", "beta0", "beta1", "r_squared"])?;
    for (cal, g, fit) in &report.table5 {
        let cells = match fit {
            Ok(fit) => [f(fit.beta0), f(fit.beta1), f(fit.pseudo_r2)],
            Err(_) => Default::default(),
        };
        write_row(&mut w, [cal.clone(), g.to_string(), cells[0].clone(), cells[1].clone(), cells[2].clone()])?;
    }
    finish(w)
}

/// `calendar,group,se_beta0,se_beta1,observations,status`
pub fn write_table5_detail(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["calendar", "group", "se_beta0", "se_beta1", "observations", "status"])?;
    for (cal, g, fit) in &report.table5 {
        let row = match fit {
            Ok(fit) => [
                cal.clone(),
                g.to_string(),
                f(fit.se_beta0),
                f(fit.se_beta1),
                fit.observations.to_string(),
                "ok".into(),
            ],
            Err(e) => [cal.clone(), g.to_string(), String::new(), String::new(), String::new(), e.clone()],
        };
        write_row(&mut w, row)?;
    }
    finish(w)
}

/// `calendar,days,group,r_count,r_pct,up_ls_count,up_ls_pct,down_ls_count,down_ls_pct,cj_days_count,cj_days_pct`
/// where `days` is `announcement` or `non_announcement`.
pub fn write_table6(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(
        &mut w,
        [
            "calendar", "days", "group", "r_count", "r_pct", "up_ls_count", "up_ls_pct", "down_ls_count",
            "down_ls_pct", "cj_days_count", "cj_days_pct",
        ],
    )?;
    for (cal, r) in &report.table6 {
        write_row(
            &mut w,
            [
                cal.clone(),
                section(r.announcement).into(),
                r.group.to_string(),
                r.rotations.to_string(),
                f(r.pct_rotations()),
                r.up_shifts.to_string(),
                f(r.pct_up_shifts()),
                r.down_shifts.to_string(),
                f(r.pct_down_shifts()),
                r.days.to_string(),
                f(r.pct_days()),
            ],
        )?;
    }
    finish(w)
}

fn section(announcement: bool) -> &'static str {
    if announcement {
        "announcement"
    } else {
        "non_announcement"
    }
}

/// `calendar,days,group,sample_days`: denominators of the Table 6
/// percentages.
pub fn write_table6_denominators(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["calendar", "days", "group", "sample_days"])?;
    for (cal, r) in &report.table6 {
        write_row(
            &mut w,
            [cal.clone(), section(r.announcement).into(), r.group.to_string(), r.sample_days.to_string()],
        )?;
    }
    finish(w)
}

/// `group,bin_start,count`
pub fn write_histogram(report: &AnalysisReport, out: impl Write) -> Result<()> {
    let mut w = writer(out);
    write_row(&mut w, ["group", "bin_start", "count"])?;
    for (g, bins) in &report.histogram {
        for b in bins {
            write_row(&mut w, [g.to_string(), b.start.format("%H:%M").to_string(), b.count.to_string()])?;
        }
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::BootstrapConfig;
    use crate::events::Window;
    use crate::jwc::JwcConfig;
    use crate::pipeline::{run_decomposition, PipelineConfig};
    use crate::sim::{simulate, SimJump, SimScenario};
    use chrono::NaiveTime;

    fn session() -> SessionSpec {
        SessionSpec::new(
            NaiveTime::from_hms_opt(7, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            chrono_tz::America::Chicago,
            300,
        )
        .unwrap()
    }

    fn run() -> (DecompositionRun, Vec<Group>) {
        let mut s = SimScenario::bivariate(108, 4, 0.01, 0.8, 5);
        let big = 10.0 * s.interval_sd(0);
        // 13:10 on day 1 and 08:00 on day 2.
        s.jumps.push(SimJump { day: 1, index: 74, sizes: vec![big, -big] });
        s.jumps.push(SimJump { day: 2, index: 12, sizes: vec![big, big] });
        let panels: Vec<_> = simulate(&s)
            .unwrap()
            .iter()
            .map(|d| d.to_panel(&s.instruments, &session()).unwrap())
            .collect();
        let config = PipelineConfig {
            bootstrap: BootstrapConfig {
                replications: 199,
                alpha: 0.05,
                jwc: JwcConfig::default().with_slow_spacing(2),
            },
            seed: 3,
            ..PipelineConfig::default()
        };
        let groups = vec![Group::new(["x1", "x2"])];
        (run_decomposition(&panels, &groups, &[], &config), groups)
    }

    #[test]
    fn decomposition_round_trip() {
        let (run, _) = run();
        let mut buf = Vec::new();
        write_decomposition_csv(&run, &mut buf).unwrap();
        let back = read_decomposition_csv(Path::new("d.csv"), buf.as_slice()).unwrap();
        let original: Vec<DayDecomposition> = run
            .days
            .iter()
            .flat_map(|d| d.pairs.iter().cloned())
            .map(|mut d| {
                d.events.clear();
                d
            })
            .collect();
        assert_eq!(back.len(), original.len());
        for (a, b) in back.iter().zip(&original) {
            assert_eq!(a.qv.to_bits(), b.qv.to_bits());
            assert_eq!(a.ic.to_bits(), b.ic.to_bits());
            assert_eq!(a.classification, b.classification);
        }
        let mut buf = Vec::new();
        write_cojumps_csv(&run, &mut buf).unwrap();
        let rows = read_cojumps_csv(Path::new("c.csv"), buf.as_slice()).unwrap();
        assert_eq!(rows, cojump_rows(&run));
    }

    #[test]
    fn report_tables() {
        let (run, groups) = run();
        let decomps: Vec<DayDecomposition> = run.days.iter().flat_map(|d| d.pairs.clone()).collect();
        let rows = cojump_rows(&run);
        let dates: Vec<NaiveDate> = run.days.iter().map(|d| d.date).collect();
        let fomc = AnnouncementCalendar::new(
            "fomc",
            chrono_tz::America::Chicago,
            [dates[1].and_hms_opt(13, 0, 0).unwrap()],
            vec![Window::minutes(0, 30)],
        )
        .unwrap();
        let report = build_report(&decomps, &rows, &groups, &[fomc], &session(), 30).unwrap();
        assert_eq!(report.table3[0].days_with_cj, 2);
        let t6 = &report.table6;
        assert_eq!(t6.len(), 2);
        let (_, ann) = &t6[0];
        assert_eq!((ann.rotations, ann.days, ann.sample_days), (1, 1, 1));
        let (_, non) = &t6[1];
        // The 08:00 co-jump is outside the 13:00 anchor window.
        assert_eq!((non.days, non.sample_days), (0, 3));
        // News perfectly predicts the windowed co-jump: separated.
        assert!(report.table5[0].2.is_err());
        let hist = &report.histogram[0].1;
        assert_eq!(hist.iter().map(|b| b.count).sum::<usize>(), 2);
        let mut buf = Vec::new();
        write_table6(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("calendar,days,group,r_count,r_pct,"));
        assert!(text.contains("fomc,announcement,x1-x2,1,100,0,0,0,0,1,100\n"));
    }

    #[test]
    fn empty_inputs_give_header_only_tables() {
        let report = build_report(&[], &[], &[], &[], &session(), 30).unwrap();
        let mut buf = Vec::new();
        write_table3(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "pair,days_with_cj,qv,pct_cj_qv\n");
    }

    #[test]
    fn bad_headers_are_rejected() {
        let err = read_decomposition_csv(Path::new("d.csv"), "date,pair\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
