//! Result files: CSV with a manifest-hash comment line, JSON mirrors and the
//! run manifest. Writes go to a temporary sibling and are renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the command, code version and canonical configuration.
pub fn manifest_hash(command: &str, config: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(CODE_VERSION.as_bytes());
    h.update([0]);
    h.update(config.canonical().as_bytes());
    hex::encode(h.finalize())
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::config(format!("cannot write {}: {e}", path.display()))
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io_failure(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_failure(path, e))
}

/// Tabular output of one command.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text: `# manifest <hash>` line, header, rows.
    pub fn to_csv(&self, hash: &str) -> Vec<u8> {
        let mut out = format!("# manifest {hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header).expect("in-memory write");
            for r in &self.rows {
                w.write_record(r).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        out
    }
}

/// Collected outputs of one run.
pub struct Run {
    pub command: &'static str,
    pub config: RunConfig,
    pub hash: String,
    pub dir: PathBuf,
    files: Vec<PathBuf>,
    timings: Vec<(String, f64)>,
    pub converged: bool,
    started: std::time::Instant,
}

impl Run {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        let hash = manifest_hash(command, &config);
        let dir = config.output_dir();
        Run {
            command,
            config,
            hash,
            dir,
            files: Vec::new(),
            timings: Vec::new(),
            converged: true,
            started: std::time::Instant::now(),
        }
    }

    /// Times `f` under `label` for the manifest.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.timings.push((label.to_string(), t0.elapsed().as_secs_f64()));
        out
    }

    /// Writes `<command>.csv` and the JSON mirror `<command>.json`.
    pub fn emit(&mut self, table: &Table, meta: Value) -> Result<(), Failure> {
        let csv_path = self.dir.join(format!("{}.csv", self.command));
        write_atomic(&csv_path, &table.to_csv(&self.hash))?;
        let rows: Vec<Value> = table
            .rows
            .iter()
            .map(|r| {
                Value::Object(table.header.iter().zip(r).map(|(k, v)| (k.clone(), cell(v))).collect())
            })
            .collect();
        let mirror = json!({
            "schema_version": SCHEMA_VERSION,
            "manifest_hash": self.hash,
            "command": self.command,
            "code_version": CODE_VERSION,
            "config": self.config,
            "meta": meta,
            "columns": table.header,
            "rows": rows,
        });
        let json_path = self.dir.join(format!("{}.json", self.command));
        write_atomic(&json_path, &pretty(&mirror))?;
        self.files.push(csv_path);
        self.files.push(json_path);
        Ok(())
    }

    /// Writes `<command>.manifest.json`; the only file holding wall-clock data.
    pub fn finish(self) -> Result<(), Failure> {
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        let timings: serde_json::Map<String, Value> =
            self.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "manifest_hash": self.hash,
            "command": self.command,
            "code_version": CODE_VERSION,
            "config": self.config,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "timings_s": timings,
            "files": self.files,
            "converged": self.converged,
        });
        write_atomic(&path, &pretty(&manifest))
    }
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json serializes");
    s.push(b'\n');
    s
}

/// Numbers stay numbers in the JSON mirror; everything else is a string.
fn cell(v: &str) -> Value {
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => match v {
            "true" => json!(true),
            "false" => json!(false),
            _ => json!(v),
        },
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}
