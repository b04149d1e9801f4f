//! Deterministic CSV emission.
//!
//! Rows are rendered with LF line endings and RFC-4180-style quoting: a cell
//! is wrapped in double quotes only when it contains a comma, a quote, or a
//! line break, and embedded quotes are doubled.  Floating-point cells carry
//! 17 significant digits so that every `f64` round-trips bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::HarnessError;

/// One CSV cell: text or a full-precision number.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Verbatim text (quoted on demand).
    Text(String),
    /// Number rendered as `{:.16e}`.
    Num(f64),
    /// Integer rendered in decimal.
    Int(i64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Cell {
        Cell::Int(x)
    }
}

fn push_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Text(s) => {
            if s.contains([',', '"', '\n', '\r']) {
                out.push('"');
                out.push_str(&s.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(s);
            }
        }
        Cell::Num(x) => {
            let _ = write!(out, "{x:.16e}");
        }
        Cell::Int(x) => {
            let _ = write!(out, "{x}");
        }
    }
}

/// Render a header plus data rows as one CSV document.
pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    for (i, h) in header.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_cell(&mut out, &Cell::Text((*h).to_string()));
    }
    out.push('\n');
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_cell(&mut out, cell);
        }
        out.push('\n');
    }
    out
}

/// Write a CSV document to disk, creating parent directories.
pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render_csv(header, rows))?;
    Ok(())
}
