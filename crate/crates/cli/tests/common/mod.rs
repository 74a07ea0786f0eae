#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_cojump");

pub const SCENARIO: &str = "\
n = 108
days = 12
instruments = tu, fv, ty
sigma = 0.004, 0.006, 0.008
rho = 0.85
pattern = ushape
jump = 1, 72, 0.004, 0.006, 0.008
jump = 2, 73, -0.004, -0.006, -0.008
jump = 3, 12, 0.004, -0.006, 0.008
jump = 5, 74, 0.004, 0, 0
jump = 7, 90, 0.004, 0.006, 0.008
jump = 9, 72, 0.004, -0.006, -0.008
jump = 10, 40, -0.004, -0.006, -0.008
";

pub const FOMC: &str = "date,time\n2024-01-03,13:00\n2024-01-04,13:00\n2024-01-12,13:00\n2024-01-15,13:00\n";

pub const CONFIG: &str = r#"instruments = ["tu", "fv", "ty"]
pairs = [["tu", "fv"], ["tu", "ty"], ["fv", "ty"]]
tuples = [["tu", "fv", "ty"]]
seed = 20240102

[session]
start = "07:00"
end = "16:00"
timezone = "America/Chicago"
interval_seconds = 300

[jwc]
slow_spacing = 2

[bootstrap]
replications = 199
alpha = 0.05

[[announcements]]
name = "fomc"
path = "fomc.csv"
windows = [[0, 30]]

[report]
histogram_bin_minutes = 30

[simulate]
scenario = "scenario.txt"
"#;

/// Writes the fixed simulated study into `dir` and returns the config path.
pub fn write_study(dir: &Path) -> PathBuf {
    fs::write(dir.join("scenario.txt"), SCENARIO).unwrap();
    fs::write(dir.join("fomc.csv"), FOMC).unwrap();
    let config = dir.join("cojump.toml");
    fs::write(&config, CONFIG).unwrap();
    config
}

pub fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(config)
        .args(args)
        .env_remove("COJUMP_CONFIG")
        .output()
        .expect("binary runs")
}

pub fn run_ok(config: &Path, args: &[&str]) {
    let out = run(config, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// simulate, decompose and report into `output`.
pub fn full_pipeline(config: &Path, output: &Path, jobs: &str) {
    let out = output.to_str().unwrap();
    for cmd in ["simulate", "decompose", "report"] {
        run_ok(config, &[cmd, "--output", out, "--jobs", jobs]);
    }
}

/// Relative path to bytes for every file below `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub const REPORT_FILES: [&str; 9] = [
    "table3.csv",
    "table4.csv",
    "table4_wald.csv",
    "table5.csv",
    "table5_detail.csv",
    "table6.csv",
    "table6_denominators.csv",
    "histogram.csv",
    "manifest.json",
];

/// Compares report files with the golden copies; `UPDATE_GOLDEN=1`
/// rewrites them instead. Returns the names that differ.
pub fn compare_golden(report: &Path) -> Vec<String> {
    let golden = golden_dir();
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    if update {
        fs::create_dir_all(&golden).unwrap();
    }
    let mut differ = Vec::new();
    for name in REPORT_FILES {
        let actual = fs::read(report.join(name)).unwrap();
        if update {
            fs::write(golden.join(name), &actual).unwrap();
        } else if fs::read(golden.join(name)).ok().as_deref() != Some(actual.as_slice()) {
            differ.push(name.to_string());
        }
    }
    differ
}

pub fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or("").to_string()
}
