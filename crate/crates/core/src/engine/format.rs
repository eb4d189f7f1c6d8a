//! Line-oriented workbook text: `sheet`, `name` and cell statements.

use thiserror::Error;

use super::{Content, EngineError, SheetId, Workbook};
use crate::dates;
use crate::parser::{parse_a1, ParseError};
use crate::values::{format_number, ErrorKind, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

/// Cell input: `=formula`, or a literal. Literals are numbers (`5%` included), `TRUE`,
/// `FALSE`, `"quoted text"`, ISO dates, error codes, or bare text.
pub fn parse_input(text: &str) -> Result<Content, ParseError> {
    let t = text.trim();
    if t.starts_with('=') {
        return Content::formula(t);
    }
    Ok(Content::Literal(parse_literal(t)))
}

fn parse_literal(t: &str) -> Scalar {
    if t.is_empty() {
        return Scalar::Empty;
    }
    if let Some(inner) = t.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        if t.len() >= 2 {
            return Scalar::text(inner.replace("\"\"", "\""));
        }
    }
    if t.eq_ignore_ascii_case("TRUE") {
        return Scalar::Bool(true);
    }
    if t.eq_ignore_ascii_case("FALSE") {
        return Scalar::Bool(false);
    }
    if let Some(k) = ErrorKind::parse(t) {
        return Scalar::error(k);
    }
    if let Some(d) = dates::parse_iso(t) {
        return Scalar::Date(d);
    }
    match crate::values::parse_numeric_text(t) {
        Some(n) => Scalar::Number(n),
        None => Scalar::text(t),
    }
}

/// Parses workbook text. `#` in the first column starts a comment, blank
/// lines are ignored, and a line starting with whitespace continues the
/// previous statement.
pub fn parse_workbook(text: &str) -> Result<Workbook, FormatError> {
    let mut statements: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match statements.last_mut() {
                Some((_, s)) => {
                    s.push('\n');
                    s.push_str(line);
                }
                None => {
                    return Err(FormatError {
                        line: i + 1,
                        message: "continuation line with nothing to continue".into(),
                    })
                }
            }
            continue;
        }
        statements.push((i + 1, line.to_string()));
    }

    let mut wb = Workbook::new();
    let mut sheet = SheetId(0);
    let mut sheet_used = false;
    for (line, stmt) in statements {
        let err = |message: String| FormatError { line, message };
        if let Some(name) = stmt.strip_prefix("sheet ") {
            let name = name.trim();
            if name.is_empty() {
                return Err(err("sheet needs a name".into()));
            }
            // The implicit first sheet takes the first declared name.
            if !sheet_used && wb.sheets.len() == 1 && wb.sheets[0].cells.is_empty() {
                wb.sheets[0].name = name.to_string();
                sheet = SheetId(0);
            } else {
                sheet = wb.add_sheet(name);
            }
            sheet_used = true;
            continue;
        }
        let Some((lhs, rhs)) = stmt.split_once(":=") else {
            return Err(err(format!("expected `:=` in {:?}", first_line(&stmt))));
        };
        let lhs = lhs.trim();
        let rhs = rhs.trim();
        if let Some(name) = lhs.strip_prefix("name ") {
            let name = name.trim();
            let formula = if rhs.starts_with('=') { rhs.to_string() } else { format!("={rhs}") };
            wb.define_name(name, &formula).map_err(|e| err(e.to_string()))?;
            continue;
        }
        let coord = parse_a1(&lhs.replace('$', ""))
            .ok_or_else(|| err(format!("{lhs:?} is not a cell address")))?;
        let addr = super::CellAddress::new(sheet, coord.row, coord.col);
        sheet_used = true;
        wb.set_input(addr, rhs).map_err(|e| match e {
            EngineError::Parse { error, .. } => err(format!("{lhs}: {error}")),
            other => err(other.to_string()),
        })?;
    }
    Ok(wb)
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or("")
}

/// Serializes content (not results) in the format read by `parse_workbook`.
pub(super) fn write_workbook(wb: &Workbook) -> String {
    let mut out = String::new();
    for d in wb.names() {
        out.push_str(&format!("name {} := {}\n", d.name, indent(&d.source)));
    }
    for (i, s) in wb.sheets.iter().enumerate() {
        out.push_str(&format!("sheet {}\n", s.name));
        for (addr, content) in wb.cells_of(SheetId(i)) {
            let rhs = match content {
                Content::Formula { source, .. } => indent(source),
                Content::Literal(s) => literal_text(s),
            };
            out.push_str(&format!("{} := {}\n", addr.a1(), rhs));
        }
    }
    out
}

fn indent(source: &str) -> String {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 || l.starts_with([' ', '\t']) {
                l.to_string()
            } else {
                format!("  {l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn literal_text(s: &Scalar) -> String {
    match s {
        Scalar::Empty => String::new(),
        Scalar::Number(n) => format!("{n}"),
        Scalar::Date(d) => dates::serial_to_iso(*d).unwrap_or_else(|| format_number(*d)),
        Scalar::Text(t) => format!("\"{}\"", t.replace('"', "\"\"")),
        Scalar::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        Scalar::Error(e) => e.kind.as_str().to_string(),
    }
}
