use gridlambda_core::{Array, Scalar, Value};

pub fn quote_sheet(name: &str) -> String {
    if name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

/// Aligned text grid: numbers right-aligned, everything else left-aligned.
pub fn table(a: &Array) -> String {
    let cells: Vec<String> = a.iter().map(|s| s.to_string()).collect();
    let mut widths = vec![0usize; a.cols()];
    for (i, text) in cells.iter().enumerate() {
        let w = &mut widths[i % a.cols()];
        *w = (*w).max(text.chars().count());
    }
    let mut out = String::new();
    for r in 0..a.rows() {
        let mut line = String::new();
        for c in 0..a.cols() {
            let text = &cells[r * a.cols() + c];
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - text.chars().count();
            if matches!(a.get(r, c), Scalar::Number(_)) {
                line.push_str(&" ".repeat(pad));
                line.push_str(text);
            } else {
                line.push_str(text);
                line.push_str(&" ".repeat(pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn literal(s: &Scalar) -> String {
    match s {
        Scalar::Text(t) => format!("\"{}\"", t.replace('"', "\"\"")),
        other => other.to_string(),
    }
}

/// One-line rendering: scalars as shown in a cell, arrays in `{a,b;c,d}`
/// literal form.
pub fn inline(v: &Value) -> String {
    match v {
        Value::Scalar(s) => s.to_string(),
        Value::Array(a) if a.rows() == 1 && a.cols() == 1 => a.get(0, 0).to_string(),
        Value::Array(a) => {
            let rows: Vec<String> = (0..a.rows())
                .map(|r| (0..a.cols()).map(|c| literal(a.get(r, c))).collect::<Vec<_>>().join(","))
                .collect();
            format!("{{{}}}", rows.join(";"))
        }
        other => other.type_name().to_string(),
    }
}
