//! On-disk formats. Every CSV written here starts with a `#schema=` comment
//! line; readers skip `#` lines.

use std::fmt::Write as _;

use adaptive_qec_core::model::FitReport;
use adaptive_qec_core::sampling::{MonteCarloEstimate, ShotCounts, SweepRow, SweepTable};
use adaptive_qec_core::{
    CalibrationSeries, DistanceDecision, ExclusionReason, FleetPlan, LogicalErrorModel,
    RotatedSurfaceLayout, SavingsReport, ThresholdTable,
};
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const SWEEP_SCHEMA: &str = "sweep/v1";
pub const SWEEP_PLOT_SCHEMA: &str = "sweep-plot/v1";
pub const THRESHOLD_TABLE_SCHEMA: &str = "threshold-table/v1";
pub const MODEL_SCHEMA: &str = "logical-model/v1";
pub const PLAN_SCHEMA: &str = "fleet-plan/v1";
pub const SAVINGS_SCHEMA: &str = "savings/v1";
pub const USABILITY_SCHEMA: &str = "usability-by-distance/v1";
pub const PAULI_X_SERIES_SCHEMA: &str = "pauli-x-timeseries/v1";
pub const CNOT_SERIES_SCHEMA: &str = "cnot-timeseries/v1";
pub const DRIFT_SCHEMA: &str = "drift-summary/v1";
pub const SERIES_SCHEMA: &str = "calibration-series/v1";
pub const LAYOUT_SCHEMA: &str = "rotated-layout/v1";

fn schema_line(schema: &str) -> String {
    format!("#schema={schema}\n")
}

fn csv_body<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Non-comment lines of `text`, re-joined for the CSV reader.
fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn comment_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .map(str::trim)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

const SWEEP_HEADER: [&str; 8] = [
    "d",
    "p",
    "shots",
    "failures",
    "p_l",
    "ci_low",
    "ci_high",
    "saturated",
];

fn sweep_record(row: &SweepRow) -> [String; 8] {
    let e = &row.estimate;
    [
        row.distance.to_string(),
        row.p.to_string(),
        e.shots.to_string(),
        e.failures.to_string(),
        e.point_estimate.to_string(),
        e.ci_low.to_string(),
        e.ci_high.to_string(),
        e.saturated.to_string(),
    ]
}

pub fn sweep_csv(table: &SweepTable) -> String {
    schema_line(SWEEP_SCHEMA) + &csv_body(&SWEEP_HEADER, table.rows.iter().map(sweep_record))
}

/// Rows drawable on log-log axes (positive `p` and at least one failure),
/// same columns as the sweep.
pub fn sweep_plot_csv(table: &SweepTable) -> String {
    schema_line(SWEEP_PLOT_SCHEMA)
        + &csv_body(
            &SWEEP_HEADER,
            table
                .rows
                .iter()
                .filter(|r| r.p > 0.0 && r.estimate.failures > 0)
                .map(sweep_record),
        )
}

/// Reads a sweep CSV. Confidence bounds are recomputed from the counts, and
/// cell seeds are not stored in the file, so they read back as 0.
pub fn parse_sweep_csv(text: &str) -> Result<SweepTable> {
    let body = strip_comments(text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| anyhow!("sweep CSV lacks column {name:?}"))
    };
    let (d, p, shots, failures) = (col("d")?, col("p")?, col("shots")?, col("failures")?);
    let saturated = col("saturated")?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("").trim();
        let ctx = || format!("sweep CSV data row {}", i + 1);
        let shots: u64 = field(shots).parse().with_context(ctx)?;
        if shots == 0 {
            bail!("{}: zero shots", ctx());
        }
        let counts = ShotCounts {
            failures: field(failures).parse().with_context(ctx)?,
            saturated: field(saturated).parse().with_context(ctx)?,
        };
        rows.push(SweepRow {
            distance: field(d).parse().with_context(ctx)?,
            p: field(p).parse().with_context(ctx)?,
            estimate: MonteCarloEstimate::from_counts(shots, counts, 0),
        });
    }
    Ok(SweepTable { rows })
}

pub fn threshold_table_csv(table: &ThresholdTable) -> String {
    let mut out = schema_line(THRESHOLD_TABLE_SCHEMA);
    writeln!(out, "#target={}", table.target_logical_error).unwrap();
    out + &csv_body(
        &["d", "p_max"],
        table.entries().map(|(d, p)| [d.to_string(), p.to_string()]),
    )
}

/// Reads a `d,p_max` table. The logical target comes from a `#target=`
/// comment line.
pub fn parse_threshold_table_csv(text: &str) -> Result<ThresholdTable> {
    let target: f64 = comment_value(text, "target")
        .ok_or_else(|| anyhow!("threshold table lacks a '#target=' line"))?
        .parse()
        .context("threshold table target")?;
    let body = strip_comments(text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record?;
        let d: u32 = record
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .context("table distance")?;
        let p: f64 = record
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .context("table p_max")?;
        entries.push((d, p));
    }
    Ok(ThresholdTable::new(entries, target)?)
}

/// Thresholds used when no table or model is supplied: the per-distance
/// limits for a 1e-6 logical target from circuit-level simulation.
pub fn default_threshold_table() -> ThresholdTable {
    ThresholdTable::new([(7, 7e-4), (9, 1e-3), (11, 2e-3), (13, 7e-3)], 1e-6)
        .expect("built-in table is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub d: u32,
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub alpha: f64,
    pub p_threshold: f64,
    pub residual_rms: f64,
    pub used_rows: usize,
    pub dropped_rows: usize,
    pub target_logical_error: f64,
    pub implied_thresholds: Vec<ThresholdEntry>,
}

impl ModelFile {
    pub fn new(fit: &FitReport, target: f64, table: &ThresholdTable) -> Self {
        Self {
            schema: MODEL_SCHEMA.into(),
            alpha: fit.model.alpha,
            p_threshold: fit.model.p_threshold,
            residual_rms: fit.residual_rms,
            used_rows: fit.used_rows,
            dropped_rows: fit.dropped_rows,
            target_logical_error: target,
            implied_thresholds: table
                .entries()
                .map(|(d, p_max)| ThresholdEntry { d, p_max })
                .collect(),
        }
    }

    pub fn model(&self) -> Result<LogicalErrorModel> {
        Ok(LogicalErrorModel::new(self.alpha, self.p_threshold)?)
    }
}

pub fn parse_model_json(text: &str) -> Result<ModelFile> {
    let file: ModelFile = serde_json::from_str(text).context("model JSON")?;
    if file.schema != MODEL_SCHEMA {
        bail!("unexpected model schema {:?}", file.schema);
    }
    file.model()?;
    Ok(file)
}

fn decision_fields(decision: &DistanceDecision) -> (&'static str, String) {
    match decision {
        DistanceDecision::Assigned { distance } => ("assigned", distance.to_string()),
        DistanceDecision::Excluded(ExclusionReason::ExceedsMaxDistance { required }) => {
            ("excluded_exceeds_d_max", required.to_string())
        }
        DistanceDecision::Excluded(ExclusionReason::AboveCutoff) => {
            ("excluded_above_cutoff", String::new())
        }
    }
}

/// `qubit,p,decision,distance,cost` in ranking order. For qubits excluded
/// for exceeding `d_max`, `distance` holds the distance they would need.
pub fn plan_csv(plan: &FleetPlan) -> String {
    schema_line(PLAN_SCHEMA)
        + &csv_body(
            &["qubit", "p", "decision", "distance", "cost"],
            plan.ranked().map(|a| {
                let (decision, distance) = decision_fields(&a.decision);
                [
                    a.qubit.to_string(),
                    a.p.to_string(),
                    decision.to_string(),
                    distance,
                    a.cost.map(|c| c.to_string()).unwrap_or_default(),
                ]
            }),
        )
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn plan_json(plan: &FleetPlan) -> String {
    to_json(&Tagged {
        schema: PLAN_SCHEMA,
        body: plan,
    })
}

pub fn savings_json(report: &SavingsReport) -> String {
    to_json(&Tagged {
        schema: SAVINGS_SCHEMA,
        body: report,
    })
}

pub fn parse_savings_json(text: &str) -> Result<SavingsReport> {
    serde_json::from_str(text).context("savings JSON")
}

pub fn series_json(series: &CalibrationSeries) -> String {
    to_json(&Tagged {
        schema: SERIES_SCHEMA,
        body: series,
    })
}

pub fn parse_series_json(text: &str) -> Result<CalibrationSeries> {
    let series: CalibrationSeries = serde_json::from_str(text).context("series JSON")?;
    // re-validate ordering and per-snapshot invariants
    let snapshots = series
        .snapshots()
        .iter()
        .map(|s| {
            adaptive_qec_core::CalibrationSnapshot::new(
                s.device_name.clone(),
                s.date,
                s.qubits().to_vec(),
                s.links().to_vec(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CalibrationSeries::new(snapshots)?)
}

pub fn layout_json(layout: &RotatedSurfaceLayout) -> String {
    to_json(&Tagged {
        schema: LAYOUT_SCHEMA,
        body: layout,
    })
}

/// `date` then one usable-fraction column per distance (`d7`, `d9`, ...).
pub fn usability_csv(distances: &[u32], rows: &[(chrono::NaiveDate, Vec<f64>)]) -> String {
    let mut header = vec!["date".to_string()];
    header.extend(distances.iter().map(|d| format!("d{d}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    schema_line(USABILITY_SCHEMA)
        + &csv_body(
            &header,
            rows.iter().map(|(date, fractions)| {
                std::iter::once(date.to_string())
                    .chain(fractions.iter().map(f64::to_string))
                    .collect::<Vec<_>>()
            }),
        )
}

/// One row per `(date, qubit)`; `p` is empty where the day omits the qubit.
pub fn pauli_x_timeseries_csv(series: &CalibrationSeries) -> String {
    let mut rows = Vec::new();
    for q in series.qubit_indices() {
        for (date, p) in series.pauli_x_timeseries(q) {
            rows.push([
                date.to_string(),
                q.to_string(),
                p.map(|v| v.to_string()).unwrap_or_default(),
            ]);
        }
    }
    schema_line(PAULI_X_SERIES_SCHEMA) + &csv_body(&["date", "qubit", "p"], rows)
}

/// One row per `(date, link)`; links are named `a_b` and ordered
/// lexicographically by normalized endpoints.
pub fn cnot_timeseries_csv(series: &CalibrationSeries) -> String {
    let mut rows = Vec::new();
    for (a, b) in series.link_endpoints() {
        for (date, p) in series.cnot_timeseries(a, b) {
            rows.push([
                date.to_string(),
                format!("{a}_{b}"),
                p.map(|v| v.to_string()).unwrap_or_default(),
            ]);
        }
    }
    schema_line(CNOT_SERIES_SCHEMA) + &csv_body(&["date", "link", "p"], rows)
}

pub fn drift_csv(summaries: &[crate::drift::QubitDrift]) -> String {
    schema_line(DRIFT_SCHEMA)
        + &csv_body(
            &[
                "qubit",
                "days",
                "min",
                "max",
                "mean",
                "std",
                "crosses_reference",
            ],
            summaries.iter().map(|s| {
                [
                    s.qubit.to_string(),
                    s.days.to_string(),
                    s.min.to_string(),
                    s.max.to_string(),
                    s.mean.to_string(),
                    s.std.to_string(),
                    s.crosses_reference.to_string(),
                ]
            }),
        )
}
