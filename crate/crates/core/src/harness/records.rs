//! Benchmark rows and their CSV / JSON persistence.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 11] = [
    "dist",
    "d",
    "alpha",
    "epsilon",
    "n",
    "seed",
    "success",
    "runtime_ms",
    "score",
    "adversary",
    "note",
];

/// One estimator trial. Skipped cells carry `n = 0`, no score and a note
/// starting with `skipped:`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub dist: String,
    pub d: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub n: u64,
    pub seed: u64,
    pub success: bool,
    pub runtime_ms: u64,
    pub score: Option<f64>,
    /// Compact JSON of the adversary.
    pub adversary: String,
    #[serde(default)]
    pub note: String,
}

impl BenchmarkRecord {
    pub fn is_skipped(&self) -> bool {
        self.note.starts_with("skipped:")
    }
}

/// Orders records by `(dist, d, alpha, epsilon, n, seed)`.
pub fn sort_records(records: &mut [BenchmarkRecord]) {
    records.sort_by(|a, b| {
        a.dist
            .cmp(&b.dist)
            .then(a.d.cmp(&b.d))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.n.cmp(&b.n))
            .then(a.seed.cmp(&b.seed))
            .then(a.adversary.cmp(&b.adversary))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    Csv,
    Json,
}

impl RecordFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => RecordFormat::Json,
            _ => RecordFormat::Csv,
        }
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.dist.clone(),
            r.d.to_string(),
            float(r.alpha),
            float(r.epsilon),
            r.n.to_string(),
            r.seed.to_string(),
            r.success.to_string(),
            r.runtime_ms.to_string(),
            r.score.map(float).unwrap_or_default(),
            r.adversary.clone(),
            r.note.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let parse_err = |field: &str, e: &dyn std::fmt::Display| Error::Parse(format!("{field}: {e}"));
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let f = |i: usize| -> Result<f64> { get(i).parse().map_err(|e| parse_err(CSV_COLUMNS[i], &e)) };
        let u = |i: usize| -> Result<u64> { get(i).parse().map_err(|e| parse_err(CSV_COLUMNS[i], &e)) };
        out.push(BenchmarkRecord {
            dist: get(0).to_string(),
            d: u(1)? as usize,
            alpha: f(2)?,
            epsilon: f(3)?,
            n: u(4)?,
            seed: u(5)?,
            success: get(6).parse().map_err(|e| parse_err("success", &e))?,
            runtime_ms: u(7)?,
            score: if get(8).is_empty() { None } else { Some(f(8)?) },
            adversary: get(9).to_string(),
            note: get(10).to_string(),
        });
    }
    Ok(out)
}

pub fn write_json<W: Write>(records: &[BenchmarkRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    writeln!(out).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    Ok(serde_json::from_reader(input)?)
}

/// Writes `records` to `path`.
pub fn emit_records(records: &[BenchmarkRecord], path: &Path, format: RecordFormat) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    let res = match format {
        RecordFormat::Csv => write_csv(records, &mut buf),
        RecordFormat::Json => write_json(records, &mut buf),
    };
    res.map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    buf.flush().map_err(|e| Error::io(path, e))
}

pub fn load_records(path: &Path, format: RecordFormat) -> Result<Vec<BenchmarkRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        RecordFormat::Csv => read_csv(file),
        RecordFormat::Json => read_json(file),
    }
}
