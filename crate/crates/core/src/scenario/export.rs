use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::run::{sort_records, RunRecord, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "swept_value",
    "seed",
    "covered_fraction",
    "total_hover",
    "M",
    "L",
    "building_count",
    "wall_ms",
    "status",
];

/// Serializes records sorted by swept value then seed. Wall time is left
/// out (empty column, zero in JSON) unless `include_timing`, so repeated
/// runs produce identical bytes.
pub fn records_to_bytes(
    records: &[RunRecord],
    format: Format,
    include_timing: bool,
) -> Result<Vec<u8>> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    if !include_timing {
        for r in &mut sorted {
            r.wall_ms = 0.0;
        }
    }
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&sorted)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for r in &sorted {
                w.write_record([
                    opt(r.swept_value),
                    r.seed.to_string(),
                    r.covered_fraction.to_string(),
                    opt(r.total_hover),
                    r.drones.to_string(),
                    r.users.to_string(),
                    r.building_count.to_string(),
                    if include_timing {
                        format!("{:.3}", r.wall_ms)
                    } else {
                        String::new()
                    },
                    r.status.to_string(),
                ])?;
            }
            w.into_inner()
                .map_err(|e| Error::Config(format!("csv buffer: {e}")))
        }
    }
}

pub fn export_records(
    records: &[RunRecord],
    path: &Path,
    format: Format,
    include_timing: bool,
) -> Result<()> {
    let bytes = records_to_bytes(records, format, include_timing)?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Mean and sample standard deviation of the records sharing one swept
/// value. Hover statistics cover feasible runs only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub swept_value: Option<f64>,
    pub runs: usize,
    pub feasible: usize,
    pub covered_mean: f64,
    pub covered_std: f64,
    pub hover_mean: Option<f64>,
    pub hover_std: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One summary per distinct swept value, in export order.
pub fn summarize(records: &[RunRecord]) -> Vec<PointSummary> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let key = sorted[start].swept_value;
        let end = start
            + sorted[start..]
                .iter()
                .take_while(|r| r.swept_value == key)
                .count();
        let group = &sorted[start..end];
        let covered: Vec<f64> = group.iter().map(|r| r.covered_fraction).collect();
        let hover: Vec<f64> = group.iter().filter_map(|r| r.total_hover).collect();
        let (covered_mean, covered_std) = mean_std(&covered);
        let (hover_mean, hover_std) = if hover.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&hover);
            (Some(m), Some(s))
        };
        out.push(PointSummary {
            swept_value: key,
            runs: group.len(),
            feasible: group.iter().filter(|r| r.status == RunStatus::Ok).count(),
            covered_mean,
            covered_std,
            hover_mean,
            hover_std,
        });
        start = end;
    }
    out
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "swept_value",
    "runs",
    "feasible",
    "covered_mean",
    "covered_std",
    "hover_mean",
    "hover_std",
];

pub fn summary_to_bytes(summary: &[PointSummary], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(summary)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SUMMARY_HEADER)?;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for p in summary {
                w.write_record([
                    opt(p.swept_value),
                    p.runs.to_string(),
                    p.feasible.to_string(),
                    p.covered_mean.to_string(),
                    p.covered_std.to_string(),
                    opt(p.hover_mean),
                    opt(p.hover_std),
                ])?;
            }
            w.into_inner()
                .map_err(|e| Error::Config(format!("csv buffer: {e}")))
        }
    }
}
