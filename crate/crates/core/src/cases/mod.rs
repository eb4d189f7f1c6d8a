//! Golden corpus: `corpus/<case>/model.wb` plus `corpus/<case>/expect.tsv`.
//!
//! An expectation file starts with `mode <exact|round|abstol|reltol> [tol]`
//! and holds one or more sections. Each section opens with `target <ref>`
//! followed by tab-separated rows of expected cells. A later `mode` line
//! applies to the sections after it. Lines starting with `#` are comments.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dates;
use crate::engine::{parse_workbook, FormatError, Workbook};
use crate::stdlib::round_half_away;
use crate::values::{Array, ErrorKind, Scalar, Value};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CompareMode {
    Exact,
    /// Actual numbers are rounded half away from zero to integers.
    Round,
    AbsTol(f64),
    /// Tolerance relative to `max(|expected|, 1)`.
    RelTol(f64),
}

impl fmt::Display for CompareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareMode::Exact => f.write_str("exact"),
            CompareMode::Round => f.write_str("round"),
            CompareMode::AbsTol(t) => write!(f, "abstol {t}"),
            CompareMode::RelTol(t) => write!(f, "reltol {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub target: String,
    pub mode: CompareMode,
    pub expected: Vec<Vec<Scalar>>,
}

#[derive(Clone, Debug)]
pub struct GoldenCase {
    pub name: String,
    pub workbook_path: PathBuf,
    pub workbook_text: String,
    pub sections: Vec<Section>,
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Expect {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Workbook { path: PathBuf, source: FormatError },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub target: String,
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub name: String,
    pub cells_checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn read(path: &Path) -> Result<String, CaseError> {
    fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Every case directory under `dir`, sorted by name. Directories without a
/// `model.wb` are skipped.
pub fn load_corpus(dir: &Path) -> Result<Vec<GoldenCase>, CaseError> {
    let entries = fs::read_dir(dir).map_err(|source| CaseError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("model.wb").is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}

pub fn load_case(dir: &Path) -> Result<GoldenCase, CaseError> {
    let workbook_path = dir.join("model.wb");
    let expect_path = dir.join("expect.tsv");
    let workbook_text = read(&workbook_path)?;
    parse_workbook(&workbook_text).map_err(|source| CaseError::Workbook {
        path: workbook_path.clone(),
        source,
    })?;
    let sections = parse_expect(&read(&expect_path)?).map_err(|(line, message)| CaseError::Expect {
        path: expect_path.clone(),
        line,
        message,
    })?;
    Ok(GoldenCase {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        workbook_path,
        workbook_text,
        sections,
    })
}

fn parse_mode(rest: &str) -> Result<CompareMode, String> {
    let mut parts = rest.split_whitespace();
    let kind = parts.next().ok_or("mode needs a kind")?;
    let tol = || -> Result<f64, String> {
        let t = rest.split_whitespace().nth(1).ok_or(format!("mode {kind} needs a tolerance"))?;
        t.parse::<f64>().map_err(|_| format!("bad tolerance {t:?}"))
    };
    match kind {
        "exact" => Ok(CompareMode::Exact),
        "round" => Ok(CompareMode::Round),
        "abstol" => Ok(CompareMode::AbsTol(tol()?)),
        "reltol" => Ok(CompareMode::RelTol(tol()?)),
        other => Err(format!("unknown mode {other:?}")),
    }
}

/// Parses expectation text into sections; errors carry a 1-based line.
pub fn parse_expect(text: &str) -> Result<Vec<Section>, (usize, String)> {
    let mut mode: Option<CompareMode> = None;
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("mode ") {
            mode = Some(parse_mode(rest).map_err(|m| (line_no, m))?);
            continue;
        }
        let Some(m) = mode else {
            return Err((line_no, "expectation file must start with a mode line".into()));
        };
        if let Some(target) = line.strip_prefix("target ") {
            sections.push(Section {
                target: target.trim().to_string(),
                mode: m,
                expected: Vec::new(),
            });
            continue;
        }
        let Some(sec) = sections.last_mut() else {
            return Err((line_no, "grid row before any target line".into()));
        };
        let row: Vec<Scalar> = line.split('\t').map(expected_cell).collect();
        if let Some(first) = sec.expected.first() {
            if first.len() != row.len() {
                return Err((line_no, format!("row has {} cells, expected {}", row.len(), first.len())));
            }
        }
        sec.expected.push(row);
    }
    if let Some(s) = sections.iter().find(|s| s.expected.is_empty()) {
        return Err((text.lines().count(), format!("target {} has no rows", s.target)));
    }
    Ok(sections)
}

fn expected_cell(field: &str) -> Scalar {
    let t = field.trim();
    if t.is_empty() {
        return Scalar::Empty;
    }
    if let Some(inner) = t.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        if t.len() >= 2 {
            return Scalar::text(inner);
        }
    }
    match t {
        "TRUE" => return Scalar::Bool(true),
        "FALSE" => return Scalar::Bool(false),
        _ => {}
    }
    if let Some(k) = ErrorKind::parse(t) {
        return Scalar::error(k);
    }
    if let Some(d) = dates::parse_iso(t) {
        return Scalar::Number(d);
    }
    match t.parse::<f64>() {
        Ok(n) if n.is_finite() => Scalar::Number(n),
        _ => Scalar::text(t),
    }
}

/// Parses a tab-separated grid with the cell rules of expectation files.
pub fn parse_tsv_grid(text: &str) -> Option<Array> {
    let rows: Vec<Vec<Scalar>> = text
        .lines()
        .map(|l| l.trim_end_matches('\r').split('\t').map(expected_cell).collect())
        .collect();
    Array::from_rows(rows)
}

/// Machine-readable grid: numbers at full precision, text quoted when it
/// would otherwise read back as another type.
pub fn format_tsv(a: &Array) -> String {
    let mut out = String::new();
    for r in 0..a.rows() {
        let line: Vec<String> = (0..a.cols()).map(|c| tsv_cell(a.get(r, c))).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

fn tsv_cell(s: &Scalar) -> String {
    match s {
        Scalar::Empty => String::new(),
        Scalar::Number(n) => format!("{n}"),
        Scalar::Date(d) => dates::serial_to_iso(*d).unwrap_or_else(|| format!("{d}")),
        Scalar::Text(t) => match expected_cell(t) {
            Scalar::Text(back) if *back == **t => t.to_string(),
            _ => format!("\"{t}\""),
        },
        other => other.to_string(),
    }
}

fn cell_matches(mode: CompareMode, expected: &Scalar, actual: &Scalar) -> bool {
    match (expected.as_f64(), actual.as_f64()) {
        (Some(e), Some(a)) => match mode {
            CompareMode::Exact => e == a,
            CompareMode::Round => round_half_away(a, 0) == e,
            CompareMode::AbsTol(t) => (a - e).abs() <= t,
            CompareMode::RelTol(t) => (a - e).abs() <= t * e.abs().max(1.0),
        },
        _ => match (expected, actual) {
            (Scalar::Error(x), Scalar::Error(y)) => x.kind == y.kind,
            (Scalar::Empty, Scalar::Empty) => true,
            (Scalar::Text(x), Scalar::Text(y)) => x == y,
            (Scalar::Bool(x), Scalar::Bool(y)) => x == y,
            _ => false,
        },
    }
}

fn show(s: &Scalar) -> String {
    match s {
        Scalar::Empty => "(empty)".into(),
        Scalar::Number(n) => format!("{n}"),
        Scalar::Date(d) => dates::serial_to_iso(*d).unwrap_or_else(|| format!("{d}")),
        Scalar::Text(t) => format!("{t:?}"),
        other => other.to_string(),
    }
}

/// Values of a target evaluated against a recalculated workbook.
pub fn target_values(wb: &mut Workbook, target: &str) -> Array {
    let v = match wb.evaluate_formula(&format!("={target}")) {
        Ok(v) => v,
        Err(e) => Value::err_detail(ErrorKind::Name, format!("target {target}: {e}")),
    };
    match v {
        Value::Array(a) => (*a).clone(),
        Value::Scalar(s) => Array::new(1, 1, vec![s]),
        _ => Array::new(1, 1, vec![Scalar::error(ErrorKind::Calc)]),
    }
}

pub fn run_case(case: &GoldenCase) -> CaseReport {
    let mut report = CaseReport {
        name: case.name.clone(),
        cells_checked: 0,
        mismatches: Vec::new(),
    };
    let mut wb = match parse_workbook(&case.workbook_text) {
        Ok(wb) => wb,
        Err(e) => {
            report.mismatches.push(Mismatch {
                target: "model.wb".into(),
                row: 0,
                col: 0,
                expected: "a valid workbook".into(),
                actual: e.to_string(),
            });
            return report;
        }
    };
    wb.recalculate();
    for sec in &case.sections {
        let actual = target_values(&mut wb, &sec.target);
        let rows = sec.expected.len();
        let cols = sec.expected[0].len();
        if actual.shape() != (rows, cols) {
            report.mismatches.push(Mismatch {
                target: sec.target.clone(),
                row: 0,
                col: 0,
                expected: format!("{rows}x{cols}"),
                actual: format!("{}x{} ({})", actual.rows(), actual.cols(), show(actual.get(0, 0))),
            });
            continue;
        }
        for (r, row) in sec.expected.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                report.cells_checked += 1;
                let a = actual.get(r, c);
                if !cell_matches(sec.mode, e, a) {
                    report.mismatches.push(Mismatch {
                        target: sec.target.clone(),
                        row: r + 1,
                        col: c + 1,
                        expected: show(e),
                        actual: show(a),
                    });
                }
            }
        }
    }
    report
}
