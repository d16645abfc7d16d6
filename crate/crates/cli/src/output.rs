use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// A value written to a CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(_) => Value::Null,
            Cell::I(x) => json!(x),
            Cell::U(x) => json!(x),
            Cell::S(s) => json!(s),
            Cell::B(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::U(x as u64)
    }
}
impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

/// Builds a `Vec<Cell>` from mixed values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// Columnar result with `# key = value` metadata lines.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, String)>,
    /// Row count implied by the requested grid.
    pub declared_rows: usize,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str], declared_rows: usize) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new(), meta: Vec::new(), declared_rows }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k} = {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::io("write", e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::io("write", e.to_string()))
    }

    fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        let v = json!({ "metadata": meta, "columns": self.columns, "rows": rows });
        let mut bytes = serde_json::to_vec_pretty(&v).map_err(|e| CliError::io("write", e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Products {
    pub tables: Vec<Table>,
    /// Free-form JSON documents written as `<stem>_<name>.json`.
    pub documents: Vec<(String, Value)>,
    pub warnings: Vec<String>,
    /// Extra manifest fields (scenario description, summary figures).
    pub summary: Map<String, Value>,
}

#[derive(Debug, Serialize)]
struct OutputRecord {
    path: String,
    rows: usize,
    declared_rows: usize,
}

/// Shared state of one invocation: where to write and what to report.
pub struct Session {
    pub subcommand: &'static str,
    pub config: RunConfig,
    dir: PathBuf,
    stem: String,
    started: Instant,
    stage: &'static str,
}

impl Session {
    pub fn new(subcommand: &'static str, config: RunConfig) -> Self {
        let dir = config.out_dir();
        let stem = config.output.clone().unwrap_or_else(|| subcommand.to_string());
        Self { subcommand, config, dir, stem, started: Instant::now(), stage: "config" }
    }

    pub fn stage(&mut self, stage: &'static str) {
        self.stage = stage;
    }

    pub fn current_stage(&self) -> &'static str {
        self.stage
    }

    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        if suffix.is_empty() {
            self.dir.join(format!("{}.{ext}", self.stem))
        } else {
            self.dir.join(format!("{}_{suffix}.{ext}", self.stem))
        }
    }

    fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(path, bytes).map_err(|e| CliError::io("write", format!("{}: {e}", path.display())))
    }

    /// Writes every table and document, then the manifest.
    pub fn finish(&mut self, products: Products) -> Result<(), CliError> {
        self.stage("write");
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io("write", format!("{}: {e}", self.dir.display())))?;
        let mut outputs = Vec::new();
        let first = products.tables.first().map(|t| t.name.clone());
        for t in &products.tables {
            // the first table takes the bare stem
            let suffix = if Some(&t.name) == first.as_ref() { "" } else { t.name.as_str() };
            let (ext, bytes) = match self.config.format() {
                Format::Csv => ("csv", t.to_csv()?),
                Format::Json => ("json", t.to_json()?),
            };
            let path = self.path(suffix, ext);
            Self::write(&path, &bytes)?;
            outputs.push(OutputRecord {
                path: path.display().to_string(),
                rows: t.rows.len(),
                declared_rows: t.declared_rows,
            });
        }
        for (name, doc) in &products.documents {
            let path = self.path(name, "json");
            let mut bytes = serde_json::to_vec_pretty(doc).map_err(|e| CliError::io("write", e.to_string()))?;
            bytes.push(b'\n');
            Self::write(&path, &bytes)?;
            outputs.push(OutputRecord { path: path.display().to_string(), rows: 1, declared_rows: 1 });
        }
        self.manifest(Ok(()), &outputs, &products.warnings, &products.summary)
    }

    /// Manifest for a run that stopped with an error.
    pub fn fail(&self, err: &CliError) {
        // best effort: a failure to write the manifest must not mask the error
        if fs::create_dir_all(&self.dir).is_ok() {
            let _ = self.manifest(Err(err), &[], &[], &Map::new());
        }
    }

    fn manifest(
        &self,
        status: Result<(), &CliError>,
        outputs: &[OutputRecord],
        warnings: &[String],
        summary: &Map<String, Value>,
    ) -> Result<(), CliError> {
        let (state, code, stage, message) = match status {
            Ok(()) => ("ok", 0, Value::Null, Value::Null),
            Err(e) => ("failed", e.exit_code(), json!(e.stage), json!(e.message)),
        };
        let doc = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "status": state,
            "exit_code": code,
            "failing_stage": stage,
            "error": message,
            "config": self.config,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "warnings": warnings,
            "outputs": outputs,
            "summary": summary,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::io("write", e.to_string()))?;
        bytes.push(b'\n');
        Self::write(&self.dir.join(format!("{}.manifest.json", self.stem)), &bytes)
    }
}
