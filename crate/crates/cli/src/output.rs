//! Tables, number formatting and the provenance header shared by every
//! subcommand.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where and how results are written.
#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub format: Format,
    pub path: Option<PathBuf>,
    /// Significant decimal digits, 1 to 17.
    pub precision: usize,
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A named table whose columns carry a one-line description.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|(c, d)| (c.to_string(), d.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

/// Identifies the run that produced a table.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub subcommand: String,
    /// `--flag=value` pairs, sorted by flag name.
    pub flags: Vec<(String, String)>,
    pub seed: Option<u64>,
}

/// x rounded to `digits` significant digits, printed in the shortest form
/// that reads back to the rounded value.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let y = round_sig(x, digits);
    if y == 0.0 {
        return "0".into();
    }
    let a = y.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{y}")
    } else {
        format!("{y:e}")
    }
}

fn round_sig(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell, digits: usize) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v, digits),
        Cell::Text(s) => csv_field(s),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell, digits: usize) -> Value {
    match c {
        Cell::Int(v) => json!(v),
        Cell::Float(v) if v.is_finite() => json!(round_sig(*v, digits)),
        Cell::Float(_) | Cell::Empty => Value::Null,
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
    }
}

fn header_lines(prov: &Provenance) -> String {
    let mut s = format!("# clt-scope {}\n# subcommand: {}\n", env!("CARGO_PKG_VERSION"), prov.subcommand);
    let flags: Vec<String> = prov.flags.iter().map(|(k, v)| format!("--{k}={v}")).collect();
    let _ = writeln!(s, "# flags: {}", flags.join(" "));
    if let Some(seed) = prov.seed {
        let _ = writeln!(s, "# seed: {seed}");
    }
    s
}

fn table_csv(t: &Table, digits: usize) -> String {
    let mut s = String::new();
    for (name, doc) in &t.columns {
        let _ = writeln!(s, "# column {name}: {doc}");
    }
    let names: Vec<&str> = t.columns.iter().map(|(n, _)| n.as_str()).collect();
    s.push_str(&names.join(","));
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|c| cell_text(c, digits)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn render_csv(prov: &Provenance, tables: &[Table], digits: usize) -> String {
    let mut s = header_lines(prov);
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "# table: {}", t.name);
        s.push_str(&table_csv(t, digits));
    }
    s
}

pub fn render_json(prov: &Provenance, tables: &[Table], digits: usize) -> String {
    let flags: serde_json::Map<String, Value> =
        prov.flags.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let mut provenance = json!({
        "tool": "clt-scope",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": prov.subcommand,
        "flags": flags,
    });
    if let Some(seed) = prov.seed {
        provenance["seed"] = json!(seed);
    }
    let tables: Vec<Value> = tables
        .iter()
        .map(|t| {
            json!({
                "name": t.name,
                "columns": t.columns.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                "descriptions": t.columns.iter().map(|(_, d)| d).collect::<Vec<_>>(),
                "rows": t.rows.iter()
                    .map(|r| r.iter().map(|c| cell_json(c, digits)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({ "provenance": provenance, "tables": tables });
    let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
    s.push('\n');
    s
}

fn write_to(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

pub fn emit(spec: &OutputSpec, prov: &Provenance, tables: &[Table]) -> io::Result<()> {
    let text = match spec.format {
        Format::Csv => render_csv(prov, tables, spec.precision),
        Format::Json => render_json(prov, tables, spec.precision),
    };
    write_to(spec.path.as_deref(), &text)?;
    if let Some(dir) = &spec.plot_dir {
        fs::create_dir_all(dir)?;
        for t in tables {
            let mut s = header_lines(prov);
            let _ = writeln!(s, "# table: {}", t.name);
            s.push_str(&table_csv(t, spec.precision));
            fs::write(dir.join(format!("{}_{}.csv", prov.subcommand, t.name)), s)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_float(0.079_589_237, 3), "0.0796");
        assert_eq!(format_float(0.079_589_237, 4), "0.07959");
        assert_eq!(format_float(-1.0 / 3.0, 6), "-0.333333");
        assert_eq!(format_float(1.234_567e-9, 3), "1.23e-9");
        assert_eq!(format_float(19695.2, 17), "19695.2");
        assert_eq!(format_float(-0.0, 6), "0");
        assert_eq!(format_float(f64::NAN, 6), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &[("d", "half-width"), ("p", "probability")]);
        t.push(vec![0u64.into(), 0.5.into()]);
        let prov = Provenance { subcommand: "x".into(), flags: vec![("n".into(), "3".into())], seed: None };
        let s = render_csv(&prov, &[t], 6);
        assert!(s.starts_with("# clt-scope "));
        assert!(s.contains("# flags: --n=3\n"));
        assert!(s.ends_with("d,p\n0,0.5\n"));
    }
}
