//! Result files: the KPI CSV, per-KPI plot data and step logs.
//!
//! Every file starts with a `#` comment carrying the schema version and the
//! SHA-256 of the effective config. Files are written to a temporary name
//! and renamed into place; a failed sweep leaves a `FAILED` marker instead.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::sim::{Kpi, StepRecord, SweepResult};
use crate::sim::sweep::Job;

pub const CSV_SCHEMA: &str = "modesel-results v1";
pub const CSV_HEADER: &str = "selector,slice,sweep_var,sweep_value,kpi,mean,ci_halfwidth,n_runs";
pub const RESULTS_FILE: &str = "results.csv";
pub const CONFIG_ECHO_FILE: &str = "effective_config.txt";
pub const FAILED_MARKER: &str = "FAILED";

pub fn header_comment(schema: &str, config_hash: &str) -> String {
    format!("# {schema} config_sha256={config_hash}")
}

pub fn results_csv(results: &[SweepResult], config_hash: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", header_comment(CSV_SCHEMA, config_hash));
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in results {
        for (kpi, a) in &r.kpis {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.selector, r.slice, r.var, r.value, kpi, a.mean, a.ci_halfwidth, a.n_runs
            );
        }
    }
    s
}

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub selector: String,
    pub slice: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub kpi: String,
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub n_runs: usize,
}

pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    if lines.next() != Some(CSV_HEADER) {
        return Err("missing CSV header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let t: Vec<&str> = line.split(',').collect();
            if t.len() != 8 {
                return Err(format!("row {}: expected 8 fields", i + 1));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("row {}: bad number `{s}`", i + 1));
            Ok(CsvRow {
                selector: t[0].into(),
                slice: t[1].into(),
                sweep_var: t[2].into(),
                sweep_value: num(t[3])?,
                kpi: t[4].into(),
                mean: num(t[5])?,
                ci_halfwidth: num(t[6])?,
                n_runs: t[7].parse().map_err(|_| format!("row {}: bad n_runs", i + 1))?,
            })
        })
        .collect()
}

/// Whitespace-separated table for one KPI: the sweep value, then mean and
/// CI half-width per selector.
pub fn plot_data(results: &[SweepResult], kpi: Kpi, config_hash: &str) -> String {
    let mut selectors = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for r in results {
        if !selectors.contains(&r.selector) {
            selectors.push(r.selector);
        }
        if !values.contains(&r.value) {
            values.push(r.value);
        }
    }
    let var = results.first().map(|r| r.var.key()).unwrap_or("value");
    let mut s = String::new();
    let _ = writeln!(s, "{} kpi={kpi}", header_comment("modesel-plot v1", config_hash));
    let _ = write!(s, "{var}");
    for sel in &selectors {
        let _ = write!(s, " {sel}_mean {sel}_ci");
    }
    s.push('\n');
    for v in values {
        let _ = write!(s, "{v}");
        for sel in &selectors {
            match results.iter().find(|r| r.selector == *sel && r.value == v) {
                Some(r) => {
                    let a = r.kpi(kpi);
                    let _ = write!(s, " {} {}", a.mean, a.ci_halfwidth);
                }
                None => s.push_str(" nan nan"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn plot_file_name(kpi: Kpi) -> String {
    format!("plot_{kpi}.dat")
}

pub fn step_log_name(job: &Job, var: &str) -> String {
    format!("{}_{var}{}_run{:03}.csv", job.selector, job.value, job.run)
}

pub fn step_log(records: &[StepRecord], config_hash: &str) -> String {
    let mut s = String::with_capacity(records.len() * 120);
    let _ = writeln!(s, "{}", header_comment("modesel-steplog v1", config_hash));
    let _ = writeln!(s, "{}", StepRecord::HEADER);
    for r in records {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Writes `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub fn mark_failed(dir: &Path, message: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(FAILED_MARKER), format!("{message}\n"))
}

pub fn clear_failed(dir: &Path) -> io::Result<()> {
    match fs::remove_file(dir.join(FAILED_MARKER)) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

/// Writes the CSV, every plot file and the config echo into `dir`.
pub fn write_sweep_outputs(
    dir: &Path,
    results: &[SweepResult],
    config_text: &str,
    config_hash: &str,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let echo = dir.join(CONFIG_ECHO_FILE);
    write_atomic(&echo, format!("{}\n{config_text}", header_comment("modesel-config v1", config_hash)).as_bytes())?;
    written.push(echo);
    for kpi in Kpi::ALL {
        let p = dir.join(plot_file_name(kpi));
        write_atomic(&p, plot_data(results, kpi, config_hash).as_bytes())?;
        written.push(p);
    }
    // The CSV goes last: its presence means the sweep finished.
    let csv = dir.join(RESULTS_FILE);
    write_atomic(&csv, results_csv(results, config_hash).as_bytes())?;
    written.push(csv);
    Ok(written)
}
