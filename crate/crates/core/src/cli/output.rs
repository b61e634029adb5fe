use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::Path;

use super::config::Format;
use crate::error::{Error, Result};

/// Convention block embedded in every emitted file.
pub fn conventions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("basis_order", "diamond: (|0001>, |0010>, |0100>, |1000>), qubit 1 leftmost; bhz: written row order"),
        ("blocks", "diamond: block 1 = {|0001>, |0010>}, block 2 = {|0100>, |1000>}; bhz: {0, 2} and {1, 3}"),
        ("curvature", "F = i(Q - Q^dagger), F_tp = -2 Im Q^{theta phi}"),
        (
            "delta_phi_sign",
            "quarter-phase run uses delta_phi = sign(E_partner - E_prepared) * pi/2, so S = Q_mm + Q_nn + 2 Im Q_mn",
        ),
        ("detuning_sign", "Delta = (E_gap - omega)/2; Delta > 0 puts the carrier below the gap"),
        ("orientation", "C = -(1/2pi) * integral of F_tp dtheta dphi, so block 1 of the upper pair has C = +1"),
        ("units", "frequencies in MHz (ordinary), times in us, angles in radians unless suffixed _pi"),
    ])
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Empty in CSV, `null` in JSON.
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v}"),
            Cell::Num(_) | Cell::Null => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Null => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Num)
    }
}

/// A named table; rows are written in the order given.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Convention lines prefixed with `#`, then an RFC 4180 table with LF endings.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in conventions() {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
        Ok(out)
    }

    /// Rows as objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Files produced by one command.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn add(&mut self, name: String, contents: String) {
        self.files.insert(name, contents);
    }

    pub fn names(&self) -> Vec<String> {
        self.files.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    /// Writes every file into `dir`, creating it if needed, in name order.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Collects tables, a metadata document and charts for the requested formats.
pub struct Report<'a> {
    pub command: &'a str,
    pub formats: &'a [Format],
    pub artifacts: Artifacts,
    pub json: Map<String, Value>,
}

impl<'a> Report<'a> {
    pub fn new(command: &'a str, formats: &'a [Format], metadata: Value) -> Self {
        let mut json = Map::new();
        json.insert("command".into(), json!(command));
        json.insert("conventions".into(), json!(conventions()));
        json.insert("metadata".into(), metadata);
        Self { command, formats, artifacts: Artifacts::default(), json }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn table(&mut self, table: &Table) -> Result<()> {
        if self.wants(Format::Csv) {
            self.artifacts.add(format!("{}.csv", table.name), table.to_csv()?);
        }
        self.json.insert(table.name.clone(), table.to_json());
        Ok(())
    }

    pub fn value(&mut self, key: &str, value: Value) {
        self.json.insert(key.into(), value);
    }

    pub fn chart(&mut self, name: &str, svg: impl FnOnce() -> String) {
        if self.wants(Format::Svg) {
            self.artifacts.add(format!("{name}.svg"), svg());
        }
    }

    /// Serializes the JSON document (keys sorted) and returns all artifacts.
    pub fn finish(mut self) -> Result<Artifacts> {
        if self.wants(Format::Json) {
            let doc = Value::Object(self.json);
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
            text.push('\n');
            self.artifacts.add(format!("{}.json", self.command), text);
        }
        Ok(self.artifacts)
    }
}
