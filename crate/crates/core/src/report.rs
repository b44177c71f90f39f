//! Flat-file outputs: series and per-run CSVs, JSON-lines traces, heat map
//! grids, run manifests and trace comparison reports. Every file carries a
//! schema tag so format changes stay detectable.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ScenarioConfig, SimulationTrace, Snapshot};
use crate::engine::{BatchResult, RunSummary, SweepParam, SweepPoint, TickStats};
use crate::metrics::{self, HeatField, Matching, PathParams};

pub const SERIES_SCHEMA: &str = "crowdsim.series/1";
pub const BATCH_SERIES_SCHEMA: &str = "crowdsim.batch_series/1";
pub const RUNS_SCHEMA: &str = "crowdsim.runs/1";
pub const SWEEP_SCHEMA: &str = "crowdsim.sweep/1";
pub const TRACE_SCHEMA: &str = "crowdsim.trace/1";
pub const HEATMAP_SCHEMA: &str = "crowdsim.heatmap/1";
pub const MANIFEST_SCHEMA: &str = "crowdsim.manifest/1";
pub const COMPARE_SCHEMA: &str = "crowdsim.compare/1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("trace line {line}: {source}")]
    TraceLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace is missing its header line")]
    MissingHeader,
    #[error("unsupported trace schema `{0}`")]
    Schema(String),
}

fn schema_line(w: &mut impl Write, schema: &str) -> io::Result<()> {
    writeln!(w, "# schema={schema}")
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn series_header() -> Vec<String> {
    std::iter::once("tick".to_string())
        .chain(TickStats::COLUMNS.iter().map(|c| c.to_string()))
        .collect()
}

/// One row per tick of a single run.
pub fn write_series_csv<W: Write>(mut w: W, series: &[TickStats]) -> Result<(), ReportError> {
    schema_line(&mut w, SERIES_SCHEMA)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(series_header())?;
    for s in series {
        let mut row = vec![s.tick.to_string()];
        row.extend(s.values().iter().map(|&v| num(v)));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-tick means followed by a `_std` column for every series column.
pub fn write_batch_series_csv<W: Write>(mut w: W, batch: &BatchResult) -> Result<(), ReportError> {
    schema_line(&mut w, BATCH_SERIES_SCHEMA)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = series_header();
    header.extend(TickStats::COLUMNS.iter().map(|c| format!("{c}_std")));
    out.write_record(header)?;
    for (t, (mean, std)) in batch.mean.iter().zip(&batch.std).enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(mean.iter().chain(std).map(|&v| num(v)));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Termination table: one row per run.
pub fn write_runs_csv<W: Write>(mut w: W, runs: &[RunSummary]) -> Result<(), ReportError> {
    schema_line(&mut w, RUNS_SCHEMA)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "run",
        "seed",
        "final_tick",
        "termination",
        "final_active_ratio",
        "mean_coop_cops",
        "mean_coop_activists",
    ])?;
    for (i, r) in runs.iter().enumerate() {
        out.write_record([
            i.to_string(),
            r.seed.to_string(),
            r.final_tick.to_string(),
            r.termination.as_str().to_string(),
            num(r.final_active_ratio),
            opt(r.mean_coop_cops),
            opt(r.mean_coop_activists),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Final-tick active ratio per swept value.
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    param: SweepParam,
    points: &[SweepPoint],
) -> Result<(), ReportError> {
    schema_line(&mut w, SWEEP_SCHEMA)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "param",
        "value",
        "n_runs",
        "final_active_ratio_mean",
        "final_active_ratio_std",
        "activists_eliminated_rate",
    ])?;
    for p in points {
        let (mean, std) = p.batch.final_active_ratio();
        out.write_record([
            param.name().to_string(),
            num(p.value),
            p.batch.n_runs.to_string(),
            num(mean),
            num(std),
            num(p.batch.elimination_rate(crate::engine::Termination::ActivistsEliminated)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TraceHeader {
    schema: String,
    rows: usize,
    cols: usize,
}

/// Header line, then one snapshot object per line.
pub fn write_trace_jsonl<W: Write>(mut w: W, trace: &SimulationTrace) -> Result<(), ReportError> {
    let header = TraceHeader {
        schema: TRACE_SCHEMA.to_string(),
        rows: trace.rows,
        cols: trace.cols,
    };
    serde_json::to_writer(&mut w, &header).map_err(io::Error::from)?;
    writeln!(w)?;
    for snap in &trace.snapshots {
        serde_json::to_writer(&mut w, snap).map_err(io::Error::from)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(r: R) -> Result<SimulationTrace, ReportError> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
        Ok(l) => !l.trim().is_empty(),
        Err(_) => true,
    });
    let (_, first) = lines.next().ok_or(ReportError::MissingHeader)?;
    let header: TraceHeader = serde_json::from_str(&first?)
        .map_err(|source| ReportError::TraceLine { line: 1, source })?;
    if header.schema != TRACE_SCHEMA {
        return Err(ReportError::Schema(header.schema));
    }
    let mut trace = SimulationTrace::new(header.rows, header.cols);
    for (i, line) in lines {
        let snap: Snapshot = serde_json::from_str(&line?)
            .map_err(|source| ReportError::TraceLine { line: i + 1, source })?;
        trace.snapshots.push(snap);
    }
    Ok(trace)
}

/// Grid of values, one CSV row per grid row.
pub fn write_heatmap_csv<W: Write>(mut w: W, tick: u32, sigma: f64, field: &HeatField) -> Result<(), ReportError> {
    writeln!(w, "# schema={HEATMAP_SCHEMA} tick={tick} sigma={sigma}")?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in field.values.chunks(field.cols.max(1)) {
        out.write_record(row.iter().map(|&v| num(v)))?;
    }
    out.flush()?;
    Ok(())
}

/// Everything needed to regenerate a bundle bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub scenario: ScenarioConfig,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap_every: Option<u32>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Manifest {
    pub fn new(command: &str, scenario: &ScenarioConfig, seeds: Vec<u64>) -> Self {
        Manifest {
            schema: MANIFEST_SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario: scenario.clone(),
            seeds,
            sweep: None,
            heatmap_every: None,
            files: Vec::new(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Similarity of two traces' dominant paths. Metrics that cannot be
/// computed are `None` and explained in `warnings`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema: String,
    pub entropy: Option<f64>,
    pub mean_ae: Option<f64>,
    pub idm: Option<f64>,
    pub paths_a: usize,
    pub paths_b: usize,
    pub warnings: Vec<String>,
}

pub fn compare_traces(
    a: &SimulationTrace,
    b: &SimulationTrace,
    params: &PathParams,
    matching: Matching,
) -> CompareReport {
    let pa = metrics::extract_dominant_paths(a, params);
    let pb = metrics::extract_dominant_paths(b, params);
    let mut warnings = Vec::new();
    if pa.is_empty() || pb.is_empty() {
        warnings.push(format!(
            "no dominant paths to compare (trace a: {}, trace b: {})",
            pa.len(),
            pb.len()
        ));
        return CompareReport {
            schema: COMPARE_SCHEMA.to_string(),
            entropy: None,
            mean_ae: None,
            idm: None,
            paths_a: pa.len(),
            paths_b: pb.len(),
            warnings,
        };
    }
    let entropy = match metrics::entropy_metric(&pa, &pb, matching) {
        Ok(h) => Some(h),
        Err(e) => {
            warnings.push(format!("entropy: {e}"));
            None
        }
    };
    let mean_ae = match metrics::match_paths(&pa, &pb, matching) {
        Ok(pairs) => {
            let ae = metrics::mean_angular_error(&pa, &pb, &pairs);
            if ae.is_none() {
                warnings.push("mean_ae: no matched path moved on both sides".into());
            }
            ae
        }
        Err(e) => {
            warnings.push(format!("mean_ae: {e}"));
            None
        }
    };
    let out = metrics::idm(&pa, &pb);
    warnings.extend(out.warning.map(|w| format!("idm: {w}")));
    let idm = Some(out.value);
    CompareReport {
        schema: COMPARE_SCHEMA.to_string(),
        entropy,
        mean_ae,
        idm,
        paths_a: pa.len(),
        paths_b: pb.len(),
        warnings,
    }
}
