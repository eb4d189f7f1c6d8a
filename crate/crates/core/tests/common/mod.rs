#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use gridlambda_core::parser::{BinOp, CellCoord, CellRef, Literal, Param, RangeRef, UnaryOp};
use gridlambda_core::{Array, CellAddress, ErrorKind, Expr, Scalar, Value, Workbook};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Workbook from `(address, input)` pairs and `(name, formula)` pairs,
/// already recalculated.
pub fn book(cells: &[(&str, &str)], names: &[(&str, &str)]) -> Workbook {
    let mut wb = Workbook::new();
    for (n, f) in names {
        wb.define_name(n, f).unwrap();
    }
    for (a, t) in cells {
        let addr = wb.address(a).unwrap();
        wb.set_input(addr, t).unwrap();
    }
    wb.recalculate();
    wb
}

pub fn addr(wb: &Workbook, a: &str) -> CellAddress {
    wb.address(a).unwrap()
}

pub fn at(wb: &Workbook, a: &str) -> Scalar {
    wb.value(addr(wb, a))
}

pub fn eval(src: &str) -> Value {
    Workbook::new().evaluate_formula(src).unwrap()
}

pub fn eval_in(wb: &mut Workbook, src: &str) -> Value {
    wb.evaluate_formula(src).unwrap()
}

/// The value as a grid; scalars become 1x1.
pub fn grid(v: &Value) -> Array {
    match v {
        Value::Array(a) => (**a).clone(),
        Value::Scalar(s) => Array::new(1, 1, vec![s.clone()]),
        other => panic!("expected a grid value, got {}", other.type_name()),
    }
}

pub fn scalar(v: &Value) -> Scalar {
    let g = grid(v);
    assert_eq!(g.shape(), (1, 1), "expected a single value, got {:?}", g.shape());
    g.get(0, 0).clone()
}

pub fn num(v: &Value) -> f64 {
    match scalar(v) {
        s @ (Scalar::Number(_) | Scalar::Date(_)) => s.as_f64().unwrap(),
        other => panic!("expected a number, got {other:?}"),
    }
}

pub fn nums(v: &Value) -> Vec<f64> {
    grid(v)
        .iter()
        .map(|s| s.as_f64().unwrap_or_else(|| panic!("non-numeric cell {s:?}")))
        .collect()
}

pub fn err_kind(v: &Value) -> ErrorKind {
    match scalar(v) {
        Scalar::Error(e) => e.kind,
        other => panic!("expected an error, got {other:?}"),
    }
}

pub fn n(x: f64) -> Scalar {
    Scalar::Number(x)
}

pub fn t(s: &str) -> Scalar {
    Scalar::text(s)
}

pub fn e(k: ErrorKind) -> Scalar {
    Scalar::error(k)
}

pub fn rows(r: Vec<Vec<Scalar>>) -> Array {
    Array::from_rows(r).unwrap()
}

pub fn col(v: &[f64]) -> Array {
    Array::column(v.iter().map(|&x| n(x)))
}

pub fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(actual.len(), expected.len(), "length");
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        assert!((a - e).abs() <= tol, "index {i}: {a} vs {e} (tol {tol})");
    }
}

pub fn array_literal(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("{{{}}}", items.join(";"))
}

// ---- random expressions ----

const NAMES: &[&str] = &["x", "rate", "vRate", "δt", "Addλ", "total_1", "ϑ", "pCur", "a.b"];
const FUNCS: &[&str] = &["SUM", "IF", "SCAN", "INDEX", "MyFnλ", "VSTACK", "TAKE"];
const SHEETS: &[&str] = &["Sheet1", "Inputs", "My Sheet", "it's"];
const OPS: &[BinOp] = &[
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Pow,
    BinOp::Concat,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
];

fn number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(0..1000) as f64,
        1 => rng.random_range(0..1000) as f64 / 8.0,
        2 => rng.random_range(1..100) as f64 * 1e-7,
        _ => rng.random::<f64>() * 1e6,
    }
}

fn text(rng: &mut impl Rng) -> String {
    ["", "a", "say \"hi\"", "δ-x", "1,2;3"].choose(rng).unwrap().to_string()
}

fn coord(rng: &mut impl Rng) -> CellCoord {
    CellCoord {
        col: rng.random_range(1..=gridlambda_core::parser::MAX_COLS),
        row: rng.random_range(1..=gridlambda_core::parser::MAX_ROWS),
        col_abs: rng.random(),
        row_abs: rng.random(),
    }
}

fn sheet(rng: &mut impl Rng) -> Option<String> {
    if rng.random_bool(0.3) {
        Some(SHEETS.choose(rng).unwrap().to_string())
    } else {
        None
    }
}

fn error_kind(rng: &mut impl Rng) -> ErrorKind {
    *ErrorKind::ALL.choose(rng).unwrap()
}

fn literal(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..5) {
        0 => Literal::Number(-number(rng)),
        1 | 2 => Literal::Number(number(rng)),
        3 => Literal::Text(text(rng)),
        _ if rng.random() => Literal::Bool(rng.random()),
        _ => Literal::Error(error_kind(rng)),
    }
}

fn leaf(rng: &mut impl Rng) -> Expr {
    match rng.random_range(0..9) {
        0 => Expr::Number(number(rng)),
        1 => Expr::Text(text(rng)),
        2 => Expr::Bool(rng.random()),
        3 => Expr::Error(error_kind(rng)),
        4 => {
            let (r, c) = (rng.random_range(1..3), rng.random_range(1..4));
            Expr::Array((0..r).map(|_| (0..c).map(|_| literal(rng)).collect()).collect())
        }
        5 => Expr::Cell(CellRef {
            sheet: sheet(rng),
            coord: coord(rng),
        }),
        6 => Expr::Range(RangeRef::normalized(sheet(rng), coord(rng), coord(rng))),
        7 => Expr::Spill(Box::new(if rng.random() {
            Expr::name(*NAMES.choose(rng).unwrap())
        } else {
            Expr::Cell(CellRef {
                sheet: None,
                coord: coord(rng),
            })
        })),
        _ => Expr::name(*NAMES.choose(rng).unwrap()),
    }
}

/// A random expression tree of at most `depth` levels, built so that every
/// node kind the printer knows appears with some probability.
pub fn random_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.random_range(0..8) {
        0 | 1 => Expr::binary(*OPS.choose(rng).unwrap(), random_expr(rng, d), random_expr(rng, d)),
        2 => Expr::Unary {
            op: if rng.random() { UnaryOp::Neg } else { UnaryOp::Plus },
            operand: Box::new(random_expr(rng, d)),
        },
        3 => Expr::Percent(Box::new(random_expr(rng, d))),
        4 => Expr::Intersect(Box::new(random_expr(rng, d))),
        5 => {
            let k = rng.random_range(0..4);
            let args = (0..k)
                .map(|_| if k > 1 && rng.random_bool(0.15) { Expr::Omitted } else { random_expr(rng, d) })
                .collect();
            Expr::call(FUNCS.choose(rng).unwrap(), args)
        }
        6 => {
            let k = rng.random_range(1..3);
            let names: Vec<&str> = NAMES.choose_multiple(rng, k).copied().collect();
            Expr::Let {
                bindings: names
                    .iter()
                    .map(|n| (n.to_string(), Arc::new(random_expr(rng, d))))
                    .collect(),
                body: Box::new(random_expr(rng, d)),
            }
        }
        _ => {
            let k = rng.random_range(0..3);
            let required = rng.random_range(0..=k);
            let params = NAMES
                .choose_multiple(rng, k)
                .enumerate()
                .map(|(i, n)| Param {
                    name: n.to_string(),
                    optional: i >= required,
                })
                .collect();
            Expr::Lambda {
                params,
                body: Arc::new(random_expr(rng, d)),
            }
        }
    }
}
