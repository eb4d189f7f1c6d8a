use std::fmt::Write;

use super::ast::{CellCoord, Expr, Literal, UnaryOp, PREC_ATOM, PREC_PERCENT, PREC_UNARY};
use super::lexer::{column_letters, is_ident_continue, is_ident_start};

/// Canonical formula text with a leading `=`.
pub fn print_formula(e: &Expr) -> String {
    format!("={}", print_expr(e))
}

/// Canonical text without the leading `=`. Parentheses are emitted only where
/// precedence or associativity requires them.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let wrap = e.precedence() < min_prec;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Number(n) => write_number(out, *n),
        Expr::Text(s) => write_text(out, s),
        Expr::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        Expr::Error(k) => out.push_str(k.as_str()),
        Expr::Array(rows) => {
            out.push('{');
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                for (j, lit) in row.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    match lit {
                        Literal::Number(n) => write_number(out, *n),
                        Literal::Text(s) => write_text(out, s),
                        Literal::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
                        Literal::Error(k) => out.push_str(k.as_str()),
                    }
                }
            }
            out.push('}');
        }
        Expr::Cell(c) => {
            write_sheet(out, c.sheet.as_deref());
            write_coord(out, &c.coord);
        }
        Expr::Range(r) => {
            write_sheet(out, r.sheet.as_deref());
            write_coord(out, &r.start);
            out.push(':');
            write_coord(out, &r.end);
        }
        Expr::Name(n) => out.push_str(n),
        Expr::Spill(inner) => {
            write_expr(out, inner, PREC_ATOM);
            out.push('#');
        }
        Expr::Intersect(inner) => {
            out.push('@');
            write_expr(out, inner, PREC_ATOM);
        }
        Expr::Call { callee, args } => {
            write_expr(out, callee, PREC_ATOM);
            out.push('(');
            write_args(out, args.iter());
            out.push(')');
        }
        Expr::Omitted => {}
        Expr::Let { bindings, body } => {
            out.push_str("LET(");
            for (name, value) in bindings {
                out.push_str(name);
                out.push_str(", ");
                write_expr(out, value, 0);
                out.push_str(", ");
            }
            write_expr(out, body, 0);
            out.push(')');
        }
        Expr::Lambda { params, body } => {
            out.push_str("LAMBDA(");
            for p in params {
                if p.optional {
                    let _ = write!(out, "[{}], ", p.name);
                } else {
                    let _ = write!(out, "{}, ", p.name);
                }
            }
            write_expr(out, body, 0);
            out.push(')');
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_expr(out, lhs, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, p + 1);
        }
        Expr::Unary { op, operand } => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Plus => '+',
            });
            write_expr(out, operand, PREC_UNARY);
        }
        Expr::Percent(inner) => {
            write_expr(out, inner, PREC_PERCENT);
            out.push('%');
        }
    }
    if wrap {
        out.push(')');
    }
}

fn write_args<'a>(out: &mut String, args: impl Iterator<Item = &'a Expr>) {
    for (i, a) in args.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, 0);
    }
}

fn write_number(out: &mut String, n: f64) {
    // Shortest representation that parses back to the same double.
    let _ = write!(out, "{n}");
}

fn write_text(out: &mut String, s: &str) {
    out.push('"');
    out.push_str(&s.replace('"', "\"\""));
    out.push('"');
}

fn write_sheet(out: &mut String, sheet: Option<&str>) {
    let Some(sheet) = sheet else { return };
    let plain = sheet.chars().next().is_some_and(is_ident_start) && sheet.chars().all(is_ident_continue);
    if plain {
        out.push_str(sheet);
    } else {
        out.push('\'');
        out.push_str(&sheet.replace('\'', "''"));
        out.push('\'');
    }
    out.push('!');
}

fn write_coord(out: &mut String, c: &CellCoord) {
    if c.col_abs {
        out.push('$');
    }
    out.push_str(&column_letters(c.col));
    if c.row_abs {
        out.push('$');
    }
    let _ = write!(out, "{}", c.row);
}
