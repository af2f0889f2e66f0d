//! Calibration CSV ingestion.
//!
//! Input is a header-first CSV. Headers are matched after trimming and
//! case-folding, so `"Pauli-X error "` and `"pauli-x error"` both resolve.
//! Required columns: `Qubit`, `Pauli-X error`. Optional: `CNOT error`, whose
//! cells hold `a_b:value` entries separated by `;`. Other columns are
//! ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use adaptive_qec_core::{
    CalibrationError, CalibrationSeries, CalibrationSnapshot, CnotLinkRecord, QubitRecord,
};
use chrono::NaiveDate;
use thiserror::Error;

pub const QUBIT_COLUMN: &str = "Qubit";
pub const PAULI_X_COLUMN: &str = "Pauli-X error";
pub const CNOT_COLUMN: &str = "CNOT error";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: {reason}")]
    MalformedRow { row: u64, reason: String },
    #[error("row {row}: qubit {qubit} appears more than once")]
    DuplicateQubit { row: u64, qubit: u32 },
    #[error("no calibration snapshots supplied")]
    EmptySeries,
    #[error("more than one snapshot dated {0}")]
    DuplicateDate(NaiveDate),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Calibration(CalibrationError),
}

impl From<CalibrationError> for IngestError {
    fn from(err: CalibrationError) -> Self {
        match err {
            CalibrationError::EmptySeries => IngestError::EmptySeries,
            CalibrationError::DuplicateDate(date) => IngestError::DuplicateDate(date),
            other => IngestError::Calibration(other),
        }
    }
}

/// A recoverable oddity in an input file.
#[derive(Debug, Clone, PartialEq)]
pub enum IngestWarning {
    /// A link listed again (in either orientation); the first entry is kept.
    DuplicateLink {
        row: u64,
        qubit_a: u32,
        qubit_b: u32,
        kept: f64,
        ignored: f64,
    },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DuplicateLink {
                row,
                qubit_a,
                qubit_b,
                kept,
                ignored,
            } => write!(
                f,
                "row {row}: link {qubit_a}_{qubit_b} listed again; kept {kept}, ignored {ignored}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSnapshot {
    pub snapshot: CalibrationSnapshot,
    pub warnings: Vec<IngestWarning>,
}

fn fold(header: &str) -> String {
    header.trim().to_lowercase()
}

fn clean(cell: &str) -> &str {
    let cell = cell.trim();
    cell.strip_prefix('"')
        .and_then(|c| c.strip_suffix('"'))
        .unwrap_or(cell)
        .trim()
}

fn malformed(row: u64, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedRow {
        row,
        reason: reason.into(),
    }
}

fn parse_probability(row: u64, what: &str, text: &str) -> Result<f64, IngestError> {
    let value: f64 = text
        .parse()
        .map_err(|_| malformed(row, format!("{what} {text:?} is not a number")))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(malformed(row, format!("{what} {value} outside [0, 1]")));
    }
    Ok(value)
}

/// Parses one `a_b:value` link entry.
fn parse_link(row: u64, token: &str) -> Result<(u32, u32, f64), IngestError> {
    let bad = || malformed(row, format!("unparsable link entry {token:?}"));
    let (pair, value) = token.split_once(':').ok_or_else(bad)?;
    let (a, b) = pair.split_once('_').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == b {
        return Err(bad());
    }
    let value = parse_probability(row, "CNOT error", value.trim())?;
    Ok((a, b, value))
}

/// Parses one day's calibration export.
pub fn parse_snapshot(
    raw: &str,
    device: &str,
    date: NaiveDate,
) -> Result<ParsedSnapshot, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(raw.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| fold(h) == fold(name));
    let qubit_col = column(QUBIT_COLUMN).ok_or(IngestError::MissingColumn(QUBIT_COLUMN))?;
    let pauli_col = column(PAULI_X_COLUMN).ok_or(IngestError::MissingColumn(PAULI_X_COLUMN))?;
    let cnot_col = column(CNOT_COLUMN);

    let mut qubits: BTreeMap<u32, QubitRecord> = BTreeMap::new();
    let mut links: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut warnings = Vec::new();

    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let cell = |i: usize| record.get(i).map(clean).unwrap_or("");

        let qubit_text = cell(qubit_col);
        let qubit: u32 = qubit_text.parse().map_err(|_| {
            malformed(
                row,
                format!("qubit index {qubit_text:?} is not a non-negative integer"),
            )
        })?;
        let pauli_x_error = parse_probability(row, "Pauli-X error", cell(pauli_col))?;
        if qubits
            .insert(
                qubit,
                QubitRecord {
                    qubit_index: qubit,
                    pauli_x_error,
                },
            )
            .is_some()
        {
            return Err(IngestError::DuplicateQubit { row, qubit });
        }

        if let Some(col) = cnot_col {
            for token in cell(col)
                .split(';')
                .map(str::trim)
                .filter(|t| !t.is_empty())
            {
                let (a, b, value) = parse_link(row, token)?;
                let key = (a.min(b), a.max(b));
                match links.get(&key) {
                    Some(&kept) => warnings.push(IngestWarning::DuplicateLink {
                        row,
                        qubit_a: key.0,
                        qubit_b: key.1,
                        kept,
                        ignored: value,
                    }),
                    None => {
                        links.insert(key, value);
                    }
                }
            }
        }
    }

    let snapshot = CalibrationSnapshot::new(
        device,
        date,
        qubits.into_values().collect(),
        links
            .into_iter()
            .map(|((a, b), v)| CnotLinkRecord::normalized(a, b, v))
            .collect(),
    )?;
    Ok(ParsedSnapshot { snapshot, warnings })
}

/// Parses each `(raw, date)` input and assembles a date-ordered series.
pub fn load_series(
    device: &str,
    inputs: &[(String, NaiveDate)],
) -> Result<(CalibrationSeries, Vec<IngestWarning>), IngestError> {
    if inputs.is_empty() {
        return Err(IngestError::EmptySeries);
    }
    let mut snapshots = Vec::with_capacity(inputs.len());
    let mut warnings = Vec::new();
    for (raw, date) in inputs {
        let parsed = parse_snapshot(raw, device, *date)?;
        snapshots.push(parsed.snapshot);
        warnings.extend(parsed.warnings);
    }
    Ok((CalibrationSeries::new(snapshots)?, warnings))
}

/// Canonical CSV for a snapshot: `Qubit,Pauli-X error,CNOT error`, one row
/// per qubit in index order. Each link is listed on the row of its smaller
/// endpoint, falling back to the larger endpoint and then the first row.
pub fn to_canonical_csv(snapshot: &CalibrationSnapshot) -> String {
    let qubits = snapshot.qubits();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); qubits.len()];
    let row_of = |q: u32| qubits.binary_search_by_key(&q, |r| r.qubit_index).ok();
    for link in snapshot.links() {
        let row = row_of(link.qubit_a)
            .or_else(|| row_of(link.qubit_b))
            .unwrap_or(0);
        if let Some(cell) = cells.get_mut(row) {
            cell.push(format!(
                "{}_{}:{}",
                link.qubit_a, link.qubit_b, link.cnot_error
            ));
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([QUBIT_COLUMN, PAULI_X_COLUMN, CNOT_COLUMN])
        .expect("in-memory write");
    for (q, links) in qubits.iter().zip(&cells) {
        writer
            .write_record([
                q.qubit_index.to_string(),
                q.pauli_x_error.to_string(),
                links.join(";"),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Date and device from a `<device>_YYYY-MM-DD.csv` file name.
pub fn parse_file_name(path: &Path) -> Option<(String, NaiveDate)> {
    let stem = path.file_stem()?.to_str()?;
    if stem.len() < 10 {
        return None;
    }
    let (head, tail) = stem.split_at(stem.len() - 10);
    let date = NaiveDate::parse_from_str(tail, "%Y-%m-%d").ok()?;
    let device = head.strip_suffix('_').unwrap_or(head);
    Some((device.to_string(), date))
}
