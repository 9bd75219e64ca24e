//! Configuration-driven runner for the verification suites.

pub mod config;
pub mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use config::{RunConfig, Suite, SCHEMA};
use suites::{run_suite, SuiteError, Timings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

pub fn load_config(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig, RunError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| RunError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if !ov.suites.is_empty() {
        cfg.suites = ov.suites.clone();
    }
    if let Some(out) = &ov.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(RunError::Config)?;
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub pass: bool,
    pub checks: usize,
    pub failing: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub seed: u64,
    pub pass: bool,
    pub suites: Vec<SuiteSummary>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Runs every selected suite in order, writing `<suite>.json`, dumps,
/// `summary.json` and `timings.json`. The summary table goes to `table`.
pub fn run<W: Write>(cfg: &RunConfig, mut table: W) -> Result<Summary, RunError> {
    let out = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    let mut suites = cfg.suites.clone();
    suites.dedup();
    let mut summaries = Vec::new();
    let mut timings: Vec<(Suite, Timings)> = Vec::new();
    let mut rows = Vec::new();
    for suite in suites {
        let (report, t) = run_suite(suite, cfg, &out).map_err(|e| match e {
            SuiteError::Io(e) => io_err(&out, e),
        })?;
        write_json(&out.join(format!("{suite}.json")), &report)?;
        for c in &report.checks {
            rows.push((suite, c.name.clone(), c.role.clone(), c.pass));
        }
        summaries.push(SuiteSummary {
            suite,
            pass: report.pass,
            checks: report.checks.len(),
            failing: report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect(),
        });
        timings.push((suite, t));
    }
    let summary = Summary { schema: SCHEMA, seed: cfg.seed, pass: summaries.iter().all(|s| s.pass), suites: summaries };
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("timings.json"), &timings)?;
    let w = |e: std::io::Error| RunError::Io(format!("summary table: {e}"));
    if rows.is_empty() {
        writeln!(table, "no suites selected").map_err(w)?;
    }
    let name_w = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    for (suite, name, role, pass) in &rows {
        writeln!(table, "{:<10} {:<name_w$}  {}  {}", suite.name(), name, if *pass { "PASS" } else { "FAIL" }, role)
            .map_err(w)?;
    }
    Ok(summary)
}
