//! CSV and JSON output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a value back yields the identical `f64`. JSON documents carry a metadata
//! block; with the timestamp suppressed, identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::SweepTable;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Writes a header row followed by the data rows.
pub fn write_csv<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|row| {
            let mut r = vec![format_float(row.x)];
            r.extend(row.cells.iter().map(|c| opt_float(c.value)));
            r.extend(row.cells.iter().map(|c| c.status.clone()));
            r
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(w: W, table: &SweepTable) -> Result<()> {
    write_csv(w, &table.header(), &sweep_rows(table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Effective configuration after applying flags, file and defaults.
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; omitted when suppressed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
}

impl Metadata {
    pub fn new(command: &str, config: BTreeMap<String, String>, seed: Option<u64>, with_timestamp: bool) -> Self {
        Metadata {
            tool: "catflip".into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            seed,
            timestamp: with_timestamp.then(now),
        }
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub metadata: Metadata,
    pub data: T,
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, doc: &Document<T>) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, doc)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Document<T>> {
    Ok(serde_json::from_reader(r)?)
}

/// Creates `path` for writing, reporting the path on failure.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::rate::Method;
    use crate::sweep::{run_sweep, EvalOptions, Spacing, SweepGrid, SweepSpec, SweepVariable};

    fn table(count: usize) -> SweepTable {
        let spec = SweepSpec {
            variable: SweepVariable::Delta,
            grid: SweepGrid {
                start: 1.0,
                stop: 6.5,
                count,
                spacing: Spacing::Linear,
            },
            fixed: ModelParams::new(6.0, 0.0, 1.0, 0.0).unwrap(),
            methods: vec![Method::KramersBarrier, Method::SmallDetuning],
            options: EvalOptions::default(),
        };
        run_sweep(&spec).unwrap()
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut t = table(2);
        t.rows.clear();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &t).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "Delta,gamma_barrier,gamma_small,status_barrier,status_small\n"
        );
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let t = table(5);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &t).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        for (rec, row) in rdr.records().zip(&t.rows) {
            let rec = rec.unwrap();
            assert_eq!(rec[0].parse::<f64>().unwrap(), row.x);
            match row.cells[0].value {
                Some(v) => assert_eq!(rec[1].parse::<f64>().unwrap(), v),
                None => assert_eq!(&rec[1], ""),
            }
        }
    }

    #[test]
    fn quoting_follows_rfc4180() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a".into(), "b".into()], &[vec!["x,y".into(), "say \"hi\"".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn json_round_trip_and_timestamp() {
        let t = table(4);
        let doc = Document {
            metadata: Metadata::new("sweep", BTreeMap::from([("G".into(), "6".into())]), Some(3), false),
            data: t.clone(),
        };
        let mut a = Vec::new();
        write_json(&mut a, &doc).unwrap();
        assert!(!String::from_utf8_lossy(&a).contains("timestamp"));
        let back: Document<SweepTable> = read_json(a.as_slice()).unwrap();
        assert_eq!(back.data.rows.len(), t.rows.len());
        assert_eq!(back.data.rows[1].x, t.rows[1].x);
        let mut b = Vec::new();
        write_json(&mut b, &doc).unwrap();
        assert_eq!(a, b);

        let stamped = Metadata::new("sweep", BTreeMap::new(), None, true);
        assert!(stamped.timestamp.is_some());
    }
}
