//! `report.csv`, `summary.json` and `timings.csv`.
//!
//! The first two depend only on the configuration and are byte-identical
//! across runs; wall times live in the third.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::suite::{Status, SuiteReport};

pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMINGS_FILE: &str = "timings.csv";

#[derive(Debug, Serialize)]
struct Row<'a> {
    name: &'a str,
    anchor: &'a str,
    group: &'a str,
    observed: String,
    comparison: &'a str,
    tolerance: String,
    tolerance_source: &'a str,
    status: &'a str,
    detail: &'a str,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub skipped: usize,
    pub all_passed: bool,
}

impl Summary {
    pub fn of(report: &SuiteReport) -> Summary {
        Summary {
            config_hash: report.config_hash.clone(),
            checks: report.results.len(),
            passed: report.count(Status::Pass),
            failed: report.count(Status::Fail),
            errors: report.count(Status::Error),
            skipped: report.count(Status::Skip),
            all_passed: report.all_passed(),
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format { path: path.display().to_string(), reason: e.to_string() }
}

pub fn write_report(report: &SuiteReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(REPORT_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    for r in &report.results {
        w.serialize(Row {
            name: r.name,
            anchor: r.anchor,
            group: r.group,
            observed: r.observed.map(|v| format!("{v:e}")).unwrap_or_default(),
            comparison: r.comparison.as_str(),
            tolerance: format!("{:e}", r.tolerance),
            tolerance_source: r.tolerance_source.as_str(),
            status: r.status.as_str(),
            detail: &r.detail,
        })
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush()?;

    let summary = serde_json::to_string_pretty(&Summary::of(report))?;
    std::fs::write(dir.join(SUMMARY_FILE), summary + "\n")?;

    let path = dir.join(TIMINGS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    w.write_record(["name", "wall_time_s"]).map_err(|e| csv_err(&path, e))?;
    for r in &report.results {
        w.write_record([r.name.to_string(), format!("{:.6}", r.wall_time.as_secs_f64())])
            .map_err(|e| csv_err(&path, e))?;
    }
    w.flush()?;
    Ok(())
}
