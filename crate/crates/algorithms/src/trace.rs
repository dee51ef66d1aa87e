//! Per-iteration records, multi-trial aggregates, and their CSV forms. Float
//! fields are written with the shortest representation that parses back to
//! the same bits, so `read(write(rows)) == rows` exactly.

use crate::AlgorithmError;
use operator_core::Vector;

pub const TRACE_HEADER: [&str; 6] = [
    "k",
    "member_calls",
    "full_calls",
    "sq_error",
    "lyapunov",
    "bound_value",
];

/// One recorded iteration of a single run. `bound_value` carries the
/// theoretical curve when the caller supplied one.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub member_calls: u64,
    pub full_calls: u64,
    pub sq_error: f64,
    pub lyapunov: f64,
    pub bound_value: Option<f64>,
}

/// A single run: recorded rows plus diagnostics that do not go to CSV.
#[derive(Debug, Clone)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub warnings: Vec<String>,
    /// Iterate after the last executed step.
    pub final_x: Vector,
}

impl Trace {
    pub fn to_csv(&self) -> Result<String, AlgorithmError> {
        write_rows_csv(&self.rows)
    }

    pub fn last_sq_error(&self) -> f64 {
        self.rows.last().map(|r| r.sq_error).unwrap_or(f64::NAN)
    }
}

fn opt_to_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn field_to_opt(s: &str) -> Result<Option<f64>, AlgorithmError> {
    if s.is_empty() {
        Ok(None)
    } else {
        Ok(Some(parse_f64(s)?))
    }
}

fn parse_f64(s: &str) -> Result<f64, AlgorithmError> {
    s.parse()
        .map_err(|_| AlgorithmError::Trace(format!("`{s}` is not a float")))
}

fn parse_u64(s: &str) -> Result<u64, AlgorithmError> {
    s.parse()
        .map_err(|_| AlgorithmError::Trace(format!("`{s}` is not a count")))
}

pub fn write_rows_csv(rows: &[TraceRow]) -> Result<String, AlgorithmError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.member_calls.to_string(),
            r.full_calls.to_string(),
            r.sq_error.to_string(),
            r.lyapunov.to_string(),
            opt_to_field(r.bound_value),
        ])
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AlgorithmError::Trace(e.to_string()))
}

pub fn read_rows_csv(text: &str) -> Result<Vec<TraceRow>, AlgorithmError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    if header != TRACE_HEADER.as_slice() {
        return Err(AlgorithmError::Trace(format!(
            "unexpected header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| AlgorithmError::Trace(e.to_string()))?;
        if record.len() != TRACE_HEADER.len() {
            return Err(AlgorithmError::Trace(format!(
                "row with {} fields",
                record.len()
            )));
        }
        rows.push(TraceRow {
            k: parse_u64(&record[0])?,
            member_calls: parse_u64(&record[1])?,
            full_calls: parse_u64(&record[2])?,
            sq_error: parse_f64(&record[3])?,
            lyapunov: parse_f64(&record[4])?,
            bound_value: field_to_opt(&record[5])?,
        });
    }
    Ok(rows)
}

pub const STATS_HEADER: [&str; 9] = [
    "k",
    "mean_member_calls",
    "mean_full_calls",
    "mean_sq_error",
    "var_sq_error",
    "p10_sq_error",
    "p90_sq_error",
    "mean_lyapunov",
    "bound_value",
];

/// Cross-trial aggregate at one recorded iteration: arithmetic means, the
/// unbiased sample variance of the squared error, and 10/90 percentiles.
/// Call counts are means because coin-flipping methods vary them per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub k: u64,
    pub mean_member_calls: f64,
    pub mean_full_calls: f64,
    pub mean_sq_error: f64,
    pub var_sq_error: f64,
    pub p10_sq_error: f64,
    pub p90_sq_error: f64,
    pub mean_lyapunov: f64,
    pub bound_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub rows: Vec<StatsRow>,
    pub trials: usize,
    pub warnings: Vec<String>,
}

impl EnsembleStats {
    pub fn to_csv(&self) -> Result<String, AlgorithmError> {
        write_stats_csv(&self.rows)
    }

    /// Standard error of the mean squared error at a recorded row.
    pub fn standard_error(&self, row: usize) -> f64 {
        (self.rows[row].var_sq_error / self.trials as f64).sqrt()
    }
}

pub fn write_stats_csv(rows: &[StatsRow]) -> Result<String, AlgorithmError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STATS_HEADER)
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.mean_member_calls.to_string(),
            r.mean_full_calls.to_string(),
            r.mean_sq_error.to_string(),
            r.var_sq_error.to_string(),
            r.p10_sq_error.to_string(),
            r.p90_sq_error.to_string(),
            r.mean_lyapunov.to_string(),
            opt_to_field(r.bound_value),
        ])
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AlgorithmError::Trace(e.to_string()))
}

pub fn read_stats_csv(text: &str) -> Result<Vec<StatsRow>, AlgorithmError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| AlgorithmError::Trace(e.to_string()))?;
    if header != STATS_HEADER.as_slice() {
        return Err(AlgorithmError::Trace(format!(
            "unexpected header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| AlgorithmError::Trace(e.to_string()))?;
        if record.len() != STATS_HEADER.len() {
            return Err(AlgorithmError::Trace(format!(
                "row with {} fields",
                record.len()
            )));
        }
        rows.push(StatsRow {
            k: parse_u64(&record[0])?,
            mean_member_calls: parse_f64(&record[1])?,
            mean_full_calls: parse_f64(&record[2])?,
            mean_sq_error: parse_f64(&record[3])?,
            var_sq_error: parse_f64(&record[4])?,
            p10_sq_error: parse_f64(&record[5])?,
            p90_sq_error: parse_f64(&record[6])?,
            mean_lyapunov: parse_f64(&record[7])?,
            bound_value: field_to_opt(&record[8])?,
        });
    }
    Ok(rows)
}
