mod common;

use std::fs;
use std::path::Path;

use common::*;

fn error_json(stderr: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

/// Minute ticks from 06:30 to 16:30 for two instruments on two days.
fn write_ticks(dir: &Path) {
    for (name, phase) in [("tu", 0.0), ("fv", 1.0)] {
        let mut text = String::from("timestamp,price,volume\n");
        for (d, date) in ["2024-03-04", "2024-03-05"].iter().enumerate() {
            for m in 0..=600 {
                let t = 6 * 60 + 30 + m;
                let x = (m as f64 / 17.0 + phase + d as f64).sin();
                let price = 100.0 + x + if m > 300 { 0.5 } else { 0.0 };
                text.push_str(&format!("{date} {:02}:{:02}:00,{price},{}\n", t / 60, t % 60, 1 + m % 5));
            }
        }
        text.push_str("2024-03-05 12:00:30,not-a-price,1\n");
        fs::write(dir.join(format!("{name}.csv")), text).unwrap();
    }
}

const INGEST_CONFIG: &str = r#"instruments = ["tu", "fv"]
pairs = [["tu", "fv"]]

[session]
start = "07:00"
end = "16:00"
timezone = "America/Chicago"

[calendar]
excluded_dates = ["2024-03-05"]

[[ticks]]
path = "tu.csv"
instrument = "tu"

[[ticks]]
path = "fv.csv"
instrument = "fv"
"#;

#[test]
fn ingest_writes_panels_and_drop_log() {
    let dir = tempfile::tempdir().unwrap();
    write_ticks(dir.path());
    let config = dir.path().join("cojump.toml");
    fs::write(&config, INGEST_CONFIG).unwrap();
    run_ok(&config, &["ingest"]);
    let out = dir.path().join("out");
    let panel = fs::read_to_string(out.join("panels/2024-03-04.csv")).unwrap();
    assert_eq!(panel.lines().next(), Some("date,grid_time,tu,fv"));
    assert_eq!(panel.lines().count(), 109);
    assert!(!out.join("panels/2024-03-05.csv").exists());
    let drops = fs::read_to_string(out.join("drop_log.csv")).unwrap();
    assert_eq!(drops, "date,reason\n2024-03-05,excluded_date\n");
    let diagnostics = fs::read_to_string(out.join("ingest_diagnostics.csv")).unwrap();
    assert_eq!(diagnostics.lines().count(), 3);
}

#[test]
fn missing_tick_file_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    write_ticks(dir.path());
    fs::remove_file(dir.path().join("fv.csv")).unwrap();
    let config = dir.path().join("cojump.toml");
    fs::write(&config, INGEST_CONFIG).unwrap();
    let out = run(&config, &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out.stderr);
    assert_eq!(err["error"]["kind"], "io");
    assert!(err["error"]["path"].as_str().unwrap().ends_with("fv.csv"));
}

#[test]
fn unknown_pair_instrument_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cojump.toml");
    fs::write(&config, INGEST_CONFIG.replace(r#"[["tu", "fv"]]"#, r#"[["tu", "ty"]]"#)).unwrap();
    let out = run(&config, &["ingest"]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_json(&out.stderr);
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("'ty'"));
}

#[test]
fn missing_config_and_bad_flags_are_config_errors() {
    let out = std::process::Command::new(BIN)
        .arg("report")
        .env_remove("COJUMP_CONFIG")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = std::process::Command::new(BIN).args(["report", "--seed", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    let out = std::process::Command::new(BIN)
        .args(["simulate", "--jobs", "1"])
        .env("COJUMP_CONFIG", &config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/panels/2024-01-02.csv").exists());
}

#[test]
fn report_on_empty_decomposition_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(
        out.join("decomposition.csv"),
        "date,pair,qv,qv_11,qv_22,ic,ic_11,ic_22,cj,corr_qv,corr_ic,z,p_value,classification\n",
    )
    .unwrap();
    fs::write(out.join("cojumps.csv"), "date,group,index,grid_time,sizes,significant\n").unwrap();
    run_ok(&config, &["report"]);
    let report = out.join("report");
    assert_eq!(fs::read_to_string(report.join("table3.csv")).unwrap(), "pair,days_with_cj,qv,pct_cj_qv\n");
    assert_eq!(fs::read_to_string(report.join("table4.csv")).unwrap().lines().next(), Some("pair,alpha,beta,r_squared"));
}

#[test]
fn report_without_decomposition_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    let out = run(&config, &["report"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out.stderr)["error"]["path"].as_str().unwrap().ends_with("decomposition.csv"));
}

#[test]
fn malformed_panel_is_reported_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    run_ok(&config, &["simulate"]);
    let panel = dir.path().join("out/panels/2024-01-03.csv");
    let text = fs::read_to_string(&panel).unwrap().replacen("13:00:00,", "13:00:00,oops", 1);
    fs::write(&panel, text).unwrap();
    let out = run(&config, &["decompose"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out/decomposition.csv").exists());
}

fn manifest_hash(dir: &Path, config_text: &str) -> String {
    let config = write_study(dir);
    fs::write(&config, config_text).unwrap();
    let out = dir.join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(
        out.join("decomposition.csv"),
        "date,pair,qv,qv_11,qv_22,ic,ic_11,ic_22,cj,corr_qv,corr_ic,z,p_value,classification\n",
    )
    .unwrap();
    fs::write(out.join("cojumps.csv"), "date,group,index,grid_time,sizes,significant\n").unwrap();
    run_ok(&config, &["report"]);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("report/manifest.json")).unwrap()).unwrap();
    manifest["config_sha256"].as_str().unwrap().to_string()
}

#[test]
fn manifest_hash_tracks_config_content() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let same_1 = manifest_hash(a.path(), CONFIG);
    let same_2 = manifest_hash(b.path(), CONFIG);
    let changed = manifest_hash(c.path(), &format!("{CONFIG}# edited\n"));
    assert_eq!(same_1, same_2);
    assert_ne!(same_1, changed);
}

#[test]
fn seed_override_changes_tests_only_through_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    full_pipeline(&config, &a, "1");
    let b_str = b.to_str().unwrap();
    run_ok(&config, &["simulate", "--output", b_str]);
    // Same panels, different bootstrap seed.
    run_ok(&config, &["decompose", "--output", b_str, "--seed", "99"]);
    assert_eq!(fs::read(a.join("panels/2024-01-02.csv")).unwrap(), fs::read(b.join("panels/2024-01-02.csv")).unwrap());
    assert_ne!(fs::read(a.join("tests.csv")).unwrap(), fs::read(b.join("tests.csv")).unwrap());
}

#[test]
fn golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_study(dir.path());
    let out = dir.path().join("out");
    full_pipeline(&config, &out, "2");
    let differ = compare_golden(&out.join("report"));
    assert!(differ.is_empty(), "report differs from golden files: {differ:?}");
}
