//! Tables, rendering, and the run manifest written next to every output file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits in scientific notation; exact round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV body preceded by `# manifest=<name>` when a manifest exists.
    pub fn to_csv(&self, manifest: Option<&str>) -> Vec<u8> {
        let mut out = Vec::new();
        if let Some(m) = manifest {
            writeln!(out, "# manifest={m}").expect("write to Vec");
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).expect("write to Vec");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("write to Vec");
        }
        w.into_inner().expect("flush to Vec")
    }

    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> =
                        self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Command, configuration, seeds, version, timing and file digests of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub config: Value,
    pub seeds: Value,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Collects inputs and outputs of a run and writes its manifest.
pub struct Emitter {
    argv: Vec<String>,
    started: SystemTime,
    out: Option<PathBuf>,
    inputs: Vec<FileDigest>,
}

impl Emitter {
    pub fn new(argv: Vec<String>, out: Option<PathBuf>) -> Self {
        Self { argv, started: SystemTime::now(), out, inputs: Vec::new() }
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        let out = self.out.as_ref()?;
        let mut name = out.file_name()?.to_os_string();
        name.push(".manifest.json");
        Some(out.with_file_name(name))
    }

    /// File name of the manifest, as referenced from the outputs.
    pub fn manifest_name(&self) -> Option<String> {
        self.manifest_path().and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
    }

    /// Writes `primary` to `--out` (or stdout), the side files, and, when
    /// `--out` is set, the manifest.
    pub fn finish(
        self,
        primary: Vec<u8>,
        side: Vec<(PathBuf, Vec<u8>)>,
        config: Value,
        seeds: Value,
    ) -> Result<(), CliError> {
        let write = |p: &Path, bytes: &[u8]| {
            fs::write(p, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))
        };
        let mut outputs = Vec::new();
        match &self.out {
            Some(p) => {
                write(p, &primary)?;
                outputs.push(FileDigest { path: p.display().to_string(), sha256: sha256_hex(&primary) });
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(&primary)
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))?;
            }
        }
        for (p, bytes) in &side {
            write(p, bytes)?;
            outputs.push(FileDigest { path: p.display().to_string(), sha256: sha256_hex(bytes) });
        }
        if let Some(path) = self.manifest_path() {
            let manifest = RunManifest {
                tool: "dw",
                version: env!("CARGO_PKG_VERSION"),
                command: self.argv,
                config,
                seeds,
                started_unix_ms: unix_ms(self.started),
                finished_unix_ms: unix_ms(SystemTime::now()),
                inputs: self.inputs,
                outputs,
            };
            let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            text.push('\n');
            write(&path, text.as_bytes())?;
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5, -0.0, 1e-300, 8f64.sqrt()] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![0.5.into(), 3usize.into(), Cell::Empty]);
        let s = String::from_utf8(t.to_csv(Some("x.manifest.json"))).unwrap();
        assert_eq!(s, "# manifest=x.manifest.json\na,b,c\n5.0000000000000000e-1,3,\n");
    }

    #[test]
    fn manifest_sits_next_to_output() {
        let e = Emitter::new(vec![], Some(PathBuf::from("/tmp/run/curve.csv")));
        assert_eq!(e.manifest_path().unwrap(), PathBuf::from("/tmp/run/curve.csv.manifest.json"));
        assert_eq!(e.manifest_name().unwrap(), "curve.csv.manifest.json");
        assert!(Emitter::new(vec![], None).manifest_name().is_none());
    }
}
