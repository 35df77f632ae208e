//! Tables written as CSV with a provenance comment line and as JSON mirrors.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub material_sha256: String,
    pub seed: u64,
}

impl Provenance {
    fn comment(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={} material_sha256={} seed={}",
            self.tool, self.version, self.command, self.config_sha256, self.material_sha256, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Flag(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn records(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert((*c).to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    fn csv_bytes(&self, header: &str) -> Result<Vec<u8>, csv::Error> {
        let mut buf = Vec::new();
        buf.extend_from_slice(header.as_bytes());
        buf.push(b'\n');
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        Ok(w.into_inner().expect("in-memory writer"))
    }
}

/// Unit implied by a column or field suffix.
pub fn unit_of(name: &str) -> Option<&'static str> {
    let suffix = name.rsplit('_').next()?;
    Some(match suffix {
        "Hz" => "Hz",
        "MHz" => "MHz",
        "nm" => "nm",
        "mm" => "mm",
        "C" => "degC",
        "mK" => "mK",
        "W" => "W",
        "uW" => "uW",
        "ns" => "ns",
        "V" => "V",
        _ => return None,
    })
}

fn collect_units(v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if let Some(u) = unit_of(k) {
                    out.entry(k.clone()).or_insert_with(|| json!(u));
                }
                collect_units(x, out);
            }
        }
        Value::Array(a) => a.iter().for_each(|x| collect_units(x, out)),
        _ => {}
    }
}

pub struct Emitter {
    pub out_dir: PathBuf,
    pub format: Format,
    pub provenance: Provenance,
    pub config: Value,
    pub written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(out_dir: &Path, format: Format, provenance: Provenance, config: Value) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            format,
            provenance,
            config,
            written: Vec::new(),
        })
    }

    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `<stem>.csv` and/or `<stem>.json`; `extra` fields join the JSON document.
    pub fn table(&mut self, stem: &str, table: &Table, extra: Option<Value>) -> Result<(), CliError> {
        if self.format != Format::Json {
            let bytes = table
                .csv_bytes(&self.provenance.comment())
                .map_err(|e| CliError::io(self.out_dir.join(format!("{stem}.csv")), e.into()))?;
            self.write_atomic(&format!("{stem}.csv"), &bytes)?;
        }
        if self.format != Format::Csv {
            let mut doc = Map::new();
            doc.insert("columns".into(), json!(table.columns));
            doc.insert("rows".into(), table.records());
            if let Some(Value::Object(m)) = extra {
                doc.extend(m);
            }
            self.document(stem, Value::Object(doc))?;
        }
        Ok(())
    }

    /// JSON-only output, written whatever the format.
    pub fn document(&mut self, stem: &str, body: Value) -> Result<(), CliError> {
        let mut units = Map::new();
        collect_units(&body, &mut units);
        let mut doc = Map::new();
        doc.insert("provenance".into(), json!(self.provenance));
        doc.insert("config".into(), self.config.clone());
        doc.insert("units".into(), Value::Object(units));
        if let Value::Object(m) = body {
            doc.extend(m);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
        text.push('\n');
        self.write_atomic(&format!("{stem}.json"), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_from_suffix() {
        assert_eq!(unit_of("T_raw_C"), Some("degC"));
        assert_eq!(unit_of("lambda_s_nm"), Some("nm"));
        assert_eq!(unit_of("gamma_s_MHz"), Some("MHz"));
        assert_eq!(unit_of("m_p"), None);
        assert_eq!(unit_of("channel"), None);
    }

    #[test]
    fn csv_has_provenance_and_header() {
        let mut t = Table::new(&["a", "b_nm"]);
        t.push(vec![Cell::Int(1), Cell::Num(0.5)]);
        t.push(vec![Cell::Text("x,y".into()), Cell::Empty]);
        let text = String::from_utf8(t.csv_bytes("# head").unwrap()).unwrap();
        assert_eq!(text, "# head\na,b_nm\n1,0.5\n\"x,y\",\n");
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
