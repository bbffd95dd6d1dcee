//! Tabular output: CSV with `#` meta lines and JSON with `meta` and `rows`.

use std::path::{Path, PathBuf};

use lmg_otto::sweep::{SweepRow, SweepTable};
use lmg_otto::ScalingMode;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed table: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// `%.12g`-style formatting.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) => csv_field(s),
        Cell::Missing => String::new(),
    }
}

fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n
            .as_f64()
            .filter(|_| n.is_f64())
            .map_or_else(|| n.to_string(), format_float),
        other => other.to_string(),
    }
}

pub fn to_csv(meta: &Map<String, Value>, table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k} = {}\n", meta_text(v)));
    }
    let header: Vec<String> = table.columns.iter().map(|c| csv_field(c)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(cell_text).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(v) => Value::from(*v),
        Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Bool(v) => Value::Bool(*v),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Missing => Value::Null,
    }
}

pub fn to_json(meta: &Map<String, Value>, table: &Table) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| (k.clone(), cell_json(c)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("meta".into(), Value::Object(meta.clone()));
    doc.insert("columns".into(), Value::from(table.columns.clone()));
    doc.insert("rows".into(), Value::Array(rows));
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), EmitError> {
    std::fs::write(path, contents).map_err(|source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(meta: &Map<String, Value>, table: &Table, path: &Path) -> Result<(), EmitError> {
    write_file(path, &to_csv(meta, table))
}

pub fn emit_json(meta: &Map<String, Value>, table: &Table, path: &Path) -> Result<(), EmitError> {
    write_file(path, &to_json(meta, table))
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn parse_cell(s: &str) -> Cell {
    if s.is_empty() {
        return Cell::Missing;
    }
    if let Ok(v) = s.parse::<i64>() {
        return Cell::Int(v);
    }
    match s {
        "true" => return Cell::Bool(true),
        "false" => return Cell::Bool(false),
        _ => {}
    }
    match s.parse::<f64>() {
        Ok(v) => Cell::Float(v),
        Err(_) => Cell::Text(s.to_string()),
    }
}

/// Meta lines as raw strings, then the table with inferred cell types.
pub fn parse_csv(text: &str) -> Result<(Vec<(String, String)>, Table), EmitError> {
    let mut meta = Vec::new();
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            Some(l) if l.starts_with('#') => {
                let (k, v) = l[1..]
                    .split_once('=')
                    .ok_or_else(|| EmitError::Parse(format!("meta line `{l}`")))?;
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            Some(l) => break l,
            None => return Err(EmitError::Parse("missing header".into())),
        }
    };
    let columns = split_csv_line(header);
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for line in lines {
        let cells: Vec<Cell> = split_csv_line(line).iter().map(|s| parse_cell(s)).collect();
        if cells.len() != table.columns.len() {
            return Err(EmitError::Parse(format!(
                "row width {} in `{line}`",
                cells.len()
            )));
        }
        table.rows.push(cells);
    }
    Ok((meta, table))
}

pub fn parse_json(text: &str) -> Result<(Map<String, Value>, Table), EmitError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| EmitError::Parse(e.to_string()))?;
    let meta = doc["meta"]
        .as_object()
        .cloned()
        .ok_or_else(|| EmitError::Parse("missing meta".into()))?;
    let columns: Vec<String> = doc["columns"]
        .as_array()
        .ok_or_else(|| EmitError::Parse("missing columns".into()))?
        .iter()
        .map(|c| c.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| EmitError::Parse("non-string column".into()))?;
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for row in doc["rows"]
        .as_array()
        .ok_or_else(|| EmitError::Parse("missing rows".into()))?
    {
        let cells = table
            .columns
            .iter()
            .map(|c| match &row[c] {
                Value::Null => Cell::Missing,
                Value::Bool(b) => Cell::Bool(*b),
                Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64().unwrap()),
                Value::Number(n) => Cell::Float(n.as_f64().unwrap()),
                Value::String(s) => Cell::Text(s.clone()),
                other => Cell::Text(other.to_string()),
            })
            .collect();
        table.rows.push(cells);
    }
    Ok((meta, table))
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "n",
    "mode",
    "parity",
    "w",
    "q_in",
    "q_out",
    "eta_signed",
    "u_a",
    "u_b",
    "u_c",
    "u_d",
    "w_pert_x",
    "w_pert_xy",
    "u_b_pert",
];

pub fn sweep_to_table(t: &SweepTable) -> Table {
    let mut out = Table::new(&SWEEP_COLUMNS);
    for r in &t.rows {
        out.push(vec![
            r.n.into(),
            r.mode.as_str().into(),
            r.parity.into(),
            r.w.into(),
            r.q_in.into(),
            r.q_out.into(),
            r.eta_signed.into(),
            r.u_a.into(),
            r.u_b.into(),
            r.u_c.into(),
            r.u_d.into(),
            r.w_pert_x.into(),
            r.w_pert_xy.into(),
            r.u_b_pert.into(),
        ]);
    }
    out
}

fn as_f64(c: &Cell) -> Option<f64> {
    match c {
        Cell::Float(v) => Some(*v),
        Cell::Int(v) => Some(*v as f64),
        _ => None,
    }
}

pub fn table_to_sweep(t: &Table) -> Result<SweepTable, EmitError> {
    let idx = |name: &str| {
        t.column(name)
            .ok_or_else(|| EmitError::Parse(format!("missing column {name}")))
    };
    let cols: Vec<usize> = SWEEP_COLUMNS
        .iter()
        .map(|c| idx(c))
        .collect::<Result<_, _>>()?;
    let bad = |what: &str| EmitError::Parse(format!("bad {what}"));
    let mut rows = Vec::new();
    for row in &t.rows {
        let f = |k: usize| as_f64(&row[cols[k]]).ok_or_else(|| bad(SWEEP_COLUMNS[k]));
        let n = match row[cols[0]] {
            Cell::Int(v) if v > 0 => v as u32,
            _ => return Err(bad("n")),
        };
        let mode: ScalingMode = match &row[cols[1]] {
            Cell::Text(s) => s.parse().map_err(|_| bad("mode"))?,
            _ => return Err(bad("mode")),
        };
        let parity = match row[cols[2]] {
            Cell::Int(v) => v as u32,
            _ => return Err(bad("parity")),
        };
        let eta_signed = match &row[cols[6]] {
            Cell::Missing => None,
            c => Some(as_f64(c).ok_or_else(|| bad("eta_signed"))?),
        };
        rows.push(SweepRow {
            n,
            mode,
            w: f(3)?,
            q_in: f(4)?,
            q_out: f(5)?,
            eta_signed,
            u_a: f(7)?,
            u_b: f(8)?,
            u_c: f(9)?,
            u_d: f(10)?,
            w_pert_x: f(11)?,
            w_pert_xy: f(12)?,
            u_b_pert: f(13)?,
            parity,
        });
    }
    Ok(SweepTable { rows })
}
