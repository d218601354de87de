//! CSV/JSON output. Files are byte-identical for identical inputs: no
//! timestamps, fixed float precision, stable row and column order.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::experiment::{ExperimentResult, ExperimentSpec};
use super::metrics::MetricsReport;
use super::scenario::Scenario;
use crate::model::Time;
use crate::resilience::MechanismVariant;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Metric tables written one per file; rows are variants, columns sweep points.
pub const METRIC_FILES: [&str; 6] = [
    "success_rate.csv",
    "strong_success_rate.csv",
    "throughput_mbps.csv",
    "restoration_delay_ms.csv",
    "warnings.csv",
    "dropped_packets.csv",
];

fn ms(t: Time) -> String {
    format!("{:.6}", t.as_millis_f64())
}

fn cell(file: &str, r: &MetricsReport) -> String {
    match file {
        "success_rate.csv" => format!("{:.6}", r.success_rate),
        "strong_success_rate.csv" => format!("{:.6}", r.strong_success_rate),
        "throughput_mbps.csv" => format!("{:.3}", r.throughput / 1e6),
        "restoration_delay_ms.csv" => r.restoration.mean.map_or_else(|| "-".to_string(), ms),
        "warnings.csv" => format!("{:.3}", r.warnings),
        "dropped_packets.csv" => format!("{:.3}", r.dropped),
        _ => unreachable!("unknown metric file {file}"),
    }
}

fn column(result: &ExperimentResult, p: Option<u32>) -> String {
    match (&result.spec.sweep, p) {
        (Some(sw), Some(v)) => format!("{}={v}", sw.param.name()),
        _ => "all".to_string(),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    scenario: &'a str,
    scenario_sha256: &'a str,
    spec: &'a ExperimentSpec,
    files: Vec<&'a str>,
}

struct Out<'a> {
    dir: &'a Path,
}

impl Out<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv(&self, name: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), ReportError> {
        let path = self.path(name);
        let err = |source| ReportError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        for row in rows {
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|source| ReportError::Io {
            path: path.clone(),
            source,
        })
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<(), ReportError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| ReportError::Io { path, source })
    }
}

/// Writes every report file into `dir`, creating it if needed.
pub fn emit_reports(result: &ExperimentResult, scenario: &Scenario, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let out = Out { dir };
    let mut params: Vec<Option<u32>> = Vec::new();
    for r in &result.reports {
        if !params.contains(&r.param) {
            params.push(r.param);
        }
    }
    let variants: &[MechanismVariant] = &result.spec.variants;

    for file in METRIC_FILES {
        let mut rows = vec![std::iter::once("variant".to_string())
            .chain(params.iter().map(|&p| column(result, p)))
            .collect::<Vec<_>>()];
        for &v in variants {
            let mut row = vec![v.to_string()];
            for &p in &params {
                row.push(result.report(v, p).map_or_else(|| "-".to_string(), |r| cell(file, r)));
            }
            rows.push(row);
        }
        out.csv(file, rows)?;
    }

    let header = [
        "variant",
        "param",
        "seed",
        "success_rate",
        "strong_success_rate",
        "check_success_rate",
        "throughput_mbps",
        "sent",
        "delivered",
        "dropped",
        "faults",
        "warnings",
        "restorations",
        "mean_restoration_ms",
    ];
    let runs = result.runs.iter().map(|r| {
        let mean = super::metrics::mean_of(r.restorations.clone()).mean;
        vec![
            r.variant.to_string(),
            r.param.map_or_else(|| "-".to_string(), |p| p.to_string()),
            r.seed.to_string(),
            format!("{:.6}", r.success_rate),
            format!("{:.6}", r.strong_success_rate),
            format!("{:.6}", r.check_success_rate),
            format!("{:.3}", r.throughput / 1e6),
            r.sent.to_string(),
            r.delivered.to_string(),
            r.dropped.to_string(),
            r.faults.to_string(),
            r.warnings.to_string(),
            r.restorations.len().to_string(),
            mean.map_or_else(|| "-".to_string(), ms),
        ]
    });
    out.csv(
        "runs.csv",
        std::iter::once(header.map(String::from).to_vec()).chain(runs),
    )?;

    let topo = &scenario.topology;
    let cycles = result.first_cycles.iter().map(|c| {
        vec![
            c.cycle.to_string(),
            topo.switch_name(c.link.from).to_string(),
            topo.switch_name(c.link.to).to_string(),
            c.link_delay.as_nanos().to_string(),
            c.transmission_delay.as_nanos().to_string(),
            c.cost.as_nanos().to_string(),
            c.clamped.to_string(),
        ]
    });
    let head = [
        "cycle",
        "from",
        "to",
        "link_delay_ns",
        "transmission_delay_ns",
        "cost_ns",
        "clamped",
    ];
    out.csv(
        "llde_cycles.csv",
        std::iter::once(head.map(String::from).to_vec()).chain(cycles),
    )?;

    out.json("summary.json", &result.reports)?;

    let mut files: Vec<&str> = METRIC_FILES.to_vec();
    files.extend(["runs.csv", "llde_cycles.csv", "summary.json"]);
    let manifest = Manifest {
        tool: "netguard",
        version: env!("CARGO_PKG_VERSION"),
        scenario: &scenario.run.name,
        scenario_sha256: &scenario.source_hash,
        spec: &result.spec,
        files: files.clone(),
    };
    out.json("manifest.json", &manifest)?;
    files.push("manifest.json");
    Ok(files.into_iter().map(|f| out.path(f)).collect())
}
