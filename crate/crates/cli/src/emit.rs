//! Deterministic artifact emission. Every float is printed with 17
//! significant digits ({:.16e}), fields keep their insertion order, and all
//! output uses LF line endings, so identical invocations produce
//! byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use crate::CliError;

/// Canonical float rendering: 17 significant digits, scientific notation.
pub fn fnum(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A JSON document with insertion-ordered object fields.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    /// A finite number, or null when the value is NaN or infinite (the
    /// companion flag fields say why).
    pub fn num_or_null(v: f64) -> Json {
        if v.is_finite() {
            Json::Num(v)
        } else {
            Json::Null
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Num(v) => {
                if v.is_finite() {
                    out.push_str(&fnum(*v));
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                } else if items.iter().all(Json::is_scalar) {
                    out.push('[');
                    for (idx, item) in items.iter().enumerate() {
                        if idx > 0 {
                            out.push_str(", ");
                        }
                        item.write(out, indent);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (idx, item) in items.iter().enumerate() {
                        pad(out, indent + 1);
                        item.write(out, indent + 1);
                        if idx + 1 < items.len() {
                            out.push(',');
                        }
                        out.push('\n');
                    }
                    pad(out, indent);
                    out.push(']');
                }
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (idx, (key, value)) in fields.iter().enumerate() {
                    pad(out, indent + 1);
                    let _ = write!(out, "\"{key}\": ");
                    value.write(out, indent + 1);
                    if idx + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Wraps standard metadata around a command's JSON payload.
pub fn doc(command: &str, fields: Vec<(&'static str, Json)>) -> Json {
    let mut all = vec![("schema", Json::Int(1)), ("command", Json::str(command))];
    all.extend(fields);
    Json::Obj(all)
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Str(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fnum(*v),
            Cell::Str(s) => {
                if s.contains(',') || s.contains('"') || s.contains('\n') {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Int(v) => Json::Int(*v),
            Cell::Num(v) => Json::Num(*v),
            Cell::Str(s) => Json::str(s.clone()),
        }
    }
}

/// A rectangular table that renders as CSV (header + rows) or as a JSON
/// `columns`/`rows` pair.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Table {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn json_fields(&self) -> Vec<(&'static str, Json)> {
        vec![
            ("columns", Json::Arr(self.columns.iter().map(|c| Json::str(*c)).collect())),
            (
                "rows",
                Json::Arr(
                    self.rows
                        .iter()
                        .map(|r| Json::Arr(r.iter().map(Cell::json).collect()))
                        .collect(),
                ),
            ),
        ]
    }
}

/// Routes artifacts to --out (with a complementary sidecar) or stdout, and
/// progress notes to stderr.
pub struct Emitter {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub quiet: bool,
}

impl Emitter {
    pub fn primary(&self, content: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, content)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(content.as_bytes())
                    .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
            }
        }
    }

    /// Writes the complementary artifact next to --out; skipped in
    /// stdout-only mode.
    pub fn sidecar(&self, extension: &str, content: &str) -> Result<(), CliError> {
        let Some(out) = &self.out else { return Ok(()) };
        let path = out.with_extension(extension);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn note(&self, message: &str) {
        if !self.quiet {
            eprintln!("{message}");
        }
    }

    /// Emits a command with both a tabular artifact and a JSON report: the
    /// requested format becomes the primary artifact and the other one the
    /// sidecar. The JSON primary embeds the table; the JSON sidecar carries
    /// the metadata alone, since the rows already live in the CSV.
    pub fn emit_pair(
        &self,
        default: Format,
        command: &str,
        meta: Vec<(&'static str, Json)>,
        table: &Table,
    ) -> Result<(), CliError> {
        match self.format.unwrap_or(default) {
            Format::Csv => {
                self.primary(&table.to_csv())?;
                self.sidecar("json", &doc(command, meta).render())
            }
            Format::Json => {
                let mut fields = meta;
                fields.extend(table.json_fields());
                self.primary(&doc(command, fields).render())?;
                self.sidecar("csv", &table.to_csv())
            }
        }
    }

    /// Emits a JSON report whose bulk data lives in a tabular sidecar: the
    /// JSON never embeds the rows, whichever of the two is primary.
    pub fn emit_report(
        &self,
        command: &str,
        meta: Vec<(&'static str, Json)>,
        table: &Table,
    ) -> Result<(), CliError> {
        match self.format.unwrap_or(Format::Json) {
            Format::Json => {
                self.primary(&doc(command, meta).render())?;
                self.sidecar("csv", &table.to_csv())
            }
            Format::Csv => {
                self.primary(&table.to_csv())?;
                self.sidecar("json", &doc(command, meta).render())
            }
        }
    }

    /// Emits a single-artifact command whose rows are the payload: the JSON
    /// rendering embeds the table.
    pub fn emit_single(
        &self,
        default: Format,
        command: &str,
        meta: Vec<(&'static str, Json)>,
        table: &Table,
    ) -> Result<(), CliError> {
        match self.format.unwrap_or(default) {
            Format::Csv => self.primary(&table.to_csv()),
            Format::Json => {
                let mut fields = meta;
                fields.extend(table.json_fields());
                self.primary(&doc(command, fields).render())
            }
        }
    }

    /// Emits a single-artifact command whose JSON metadata already carries
    /// every value: the table is only the CSV rendering of the same scalars.
    pub fn emit_scalar(
        &self,
        command: &str,
        meta: Vec<(&'static str, Json)>,
        table: &Table,
    ) -> Result<(), CliError> {
        match self.format.unwrap_or(Format::Json) {
            Format::Json => self.primary(&doc(command, meta).render()),
            Format::Csv => self.primary(&table.to_csv()),
        }
    }
}
