use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cojump::market_data::{
    build_panels, panel_file_name, parse_ticks, read_panel_csv, write_drop_log, write_panel_csv, ReturnPanel,
    TickRecord,
};
use cojump::pipeline::{required_pairs, run_decomposition};
use cojump::report::{self, AnalysisReport};
use cojump::sim::{simulate, true_decomposition, SimScenario};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const PANEL_DIR: &str = "panels";
pub const REPORT_DIR: &str = "report";
pub const DECOMPOSITION_FILE: &str = "decomposition.csv";
pub const COJUMPS_FILE: &str = "cojumps.csv";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Renders into memory first so a failed writer leaves no partial file.
fn write_file(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> cojump::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn is_panel_file(name: &str) -> bool {
    name.strip_suffix(".csv")
        .is_some_and(|stem| chrono::NaiveDate::parse_from_str(stem, cojump::market_data::DATE_FORMAT).is_ok())
}

fn panel_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        if entry.file_name().to_str().is_some_and(is_panel_file) {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Replaces the panel directory contents with `panels`.
fn write_panels(dir: &Path, panels: &[ReturnPanel]) -> Result<()> {
    create_dir(dir)?;
    for stale in panel_files(dir)? {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    for p in panels {
        write_file(&dir.join(panel_file_name(p.date())), |w| write_panel_csv(p, w))?;
    }
    Ok(())
}

pub fn ingest(config: &mut RunConfig) -> Result<serde_json::Value> {
    if config.ticks.is_empty() {
        return Err(CliError::Config("no [[ticks]] sources configured".into()));
    }
    config.load_holidays()?;
    let tz = config.session.timezone();
    let mut ticks: BTreeMap<String, Vec<TickRecord>> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    let (mut total, mut rejected) = (0, 0);
    for source in &config.ticks {
        let default = match (&source.instrument, &config.tick_schema.instrument) {
            (Some(name), _) => name.clone(),
            (None, Some(_)) => String::new(),
            (None, None) => {
                return Err(CliError::Config(format!(
                    "{}: no instrument given and the tick schema has no instrument column",
                    source.path.display()
                )))
            }
        };
        let series = parse_ticks(&source.path, &config.tick_schema, tz, &default)?;
        total += series.total_rows;
        rejected += series.rejected;
        diagnostics.extend(series.diagnostics.iter().map(|d| (source.path.clone(), d.clone())));
        for (name, records) in series.by_instrument() {
            ticks.entry(name).or_default().extend(records);
        }
    }
    for records in ticks.values_mut() {
        records.sort_by_key(|r| r.timestamp);
    }
    let set = build_panels(&ticks, &config.instruments, &config.session, &config.calendar)?;

    create_dir(&config.output)?;
    write_panels(&config.output.join(PANEL_DIR), &set.panels)?;
    write_file(&config.output.join("drop_log.csv"), |w| write_drop_log(&set.drops, w))?;
    write_file(&config.output.join("ingest_diagnostics.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let fail = |e: csv::Error| cojump::Error::InvalidInput(format!("ingest diagnostics: {e}"));
        w.write_record(["file", "line", "reason"]).map_err(fail)?;
        for (path, d) in &diagnostics {
            w.write_record([path.display().to_string(), d.line.to_string(), d.reason.clone()])
                .map_err(fail)?;
        }
        w.flush().map_err(|e| cojump::Error::InvalidInput(format!("ingest diagnostics: {e}")))
    })?;
    Ok(json!({
        "panels": set.panels.len(),
        "dropped_days": set.drops.len(),
        "tick_rows": total,
        "rejected_rows": rejected,
    }))
}

pub fn simulate_cmd(config: &RunConfig, scenario_path: Option<&Path>) -> Result<serde_json::Value> {
    let path = scenario_path
        .map(Path::to_path_buf)
        .or_else(|| config.scenario.clone())
        .ok_or_else(|| CliError::Config("no scenario: pass --scenario or set [simulate] scenario".into()))?;
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut scenario: SimScenario = text.parse()?;
    // The master seed drives every random draw of a run.
    scenario.seed = config.pipeline.seed;
    if scenario.n != config.session.intervals() {
        return Err(CliError::Config(format!(
            "scenario simulates {} intervals but the session has {}",
            scenario.n,
            config.session.intervals()
        )));
    }
    if let Some(missing) = config.instruments.iter().find(|i| !scenario.instruments.contains(i)) {
        return Err(CliError::Config(format!("instrument '{missing}' is not simulated by the scenario")));
    }
    let days = simulate(&scenario)?;
    let panels = days
        .iter()
        .map(|d| d.to_panel(&scenario.instruments, &config.session))
        .collect::<cojump::Result<Vec<_>>>()?;

    create_dir(&config.output)?;
    write_panels(&config.output.join(PANEL_DIR), &panels)?;
    let mut truth = String::from("date,row,col,ic,cj,qv\n");
    for day in &days {
        let t = true_decomposition(day);
        for (a, ra) in scenario.instruments.iter().enumerate() {
            for (b, rb) in scenario.instruments.iter().enumerate() {
                truth.push_str(&format!(
                    "{},{ra},{rb},{},{},{}\n",
                    day.date.format(cojump::market_data::DATE_FORMAT),
                    t.ic[a][b],
                    t.cj[a][b],
                    t.qv[a][b]
                ));
            }
        }
    }
    let truth_path = config.output.join("truth.csv");
    fs::write(&truth_path, truth).map_err(|e| CliError::io(&truth_path, e))?;
    let scenario_out = config.output.join("scenario.txt");
    fs::write(&scenario_out, scenario.to_string()).map_err(|e| CliError::io(&scenario_out, e))?;
    Ok(json!({ "panels": panels.len(), "seed": scenario.seed }))
}

pub fn decompose(config: &RunConfig) -> Result<serde_json::Value> {
    let dir = config.output.join(PANEL_DIR);
    let mut panels = Vec::new();
    for path in panel_files(&dir)? {
        let bytes = read_file(&path)?;
        panels.push(read_panel_csv(&path, bytes.as_slice(), &config.session)?);
    }
    let pairs = required_pairs(&config.pairs, &config.tuples);
    let run = run_decomposition(&panels, &pairs, &config.tuples, &config.pipeline);
    if !panels.is_empty() && run.days.is_empty() {
        return Err(CliError::Numerical(format!(
            "all {} days failed; first: {} {}",
            run.failures.len(),
            run.failures[0].date,
            run.failures[0].error
        )));
    }

    let out = &config.output;
    write_file(&out.join(DECOMPOSITION_FILE), |w| report::write_decomposition_csv(&run, w))?;
    write_file(&out.join("tests.csv"), |w| report::write_tests_csv(&run, w))?;
    write_file(&out.join("jumps.csv"), |w| {
        report::write_jumps_csv(&run, |date, i| config.session.grid_times(date)[i], w)
    })?;
    write_file(&out.join(COJUMPS_FILE), |w| report::write_cojumps_csv(&run, w))?;
    write_file(&out.join("ic_matrix.csv"), |w| report::write_ic_matrix_csv(&run, w))?;
    write_file(&out.join("failed_days.csv"), |w| report::write_failures_csv(&run, w))?;
    Ok(json!({
        "days": run.days.len(),
        "failed_days": run.failures.len(),
        "pairs": pairs.len(),
        "tuples": config.tuples.len(),
    }))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn report_cmd(config: &RunConfig) -> Result<serde_json::Value> {
    let out = &config.output;
    let decomposition_path = out.join(DECOMPOSITION_FILE);
    let cojumps_path = out.join(COJUMPS_FILE);
    let decomposition_bytes = read_file(&decomposition_path)?;
    let cojumps_bytes = read_file(&cojumps_path)?;
    let decomps = report::read_decomposition_csv(&decomposition_path, decomposition_bytes.as_slice())?;
    let cojumps = report::read_cojumps_csv(&cojumps_path, cojumps_bytes.as_slice())?;

    let mut inputs = BTreeMap::new();
    inputs.insert(DECOMPOSITION_FILE.to_string(), sha256_hex(&decomposition_bytes));
    inputs.insert(COJUMPS_FILE.to_string(), sha256_hex(&cojumps_bytes));
    let mut calendars = Vec::new();
    for source in &config.announcements {
        let bytes = read_file(&source.path)?;
        inputs.insert(format!("announcements:{}", source.name), sha256_hex(&bytes));
        calendars.push(source.load()?);
    }

    let groups = config.groups();
    let analysis = report::build_report(
        &decomps,
        &cojumps,
        &groups,
        &calendars,
        &config.session,
        config.histogram_bin_minutes,
    )?;
    let dir = out.join(REPORT_DIR);
    create_dir(&dir)?;
    write_tables(&dir, &analysis)?;

    let b = &config.pipeline.bootstrap;
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(&config.source),
        "inputs": inputs,
        "seed": config.pipeline.seed,
        "bootstrap_replications": b.replications,
        "alpha": b.alpha,
        "groups": groups.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain JSON") + "\n";
    fs::write(&manifest_path, text).map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(json!({ "report": dir.display().to_string(), "days": decomps.len() }))
}

fn write_tables(dir: &Path, r: &AnalysisReport) -> Result<()> {
    type Writer = fn(&AnalysisReport, &mut Vec<u8>) -> cojump::Result<()>;
    let tables: [(&str, Writer); 8] = [
        ("table3.csv", |r, w| report::write_table3(r, w)),
        ("table4.csv", |r, w| report::write_table4(r, w)),
        ("table4_wald.csv", |r, w| report::write_table4_wald(r, w)),
        ("table5.csv", |r, w| report::write_table5(r, w)),
        ("table5_detail.csv", |r, w| report::write_table5_detail(r, w)),
        ("table6.csv", |r, w| report::write_table6(r, w)),
        ("table6_denominators.csv", |r, w| report::write_table6_denominators(r, w)),
        ("histogram.csv", |r, w| report::write_histogram(r, w)),
    ];
    for (name, render) in tables {
        write_file(&dir.join(name), |w| render(r, w))?;
    }
    Ok(())
}
