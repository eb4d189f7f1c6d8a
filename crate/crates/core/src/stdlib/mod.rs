//! Built-in functions.

mod dates;
mod helpers;
mod logic;
mod lookup;
mod math;
mod shape;

pub use math::{excel_mod, round_half_away};

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::eval::{Closure, Env, Evaluator};
use crate::parser::Expr;
use crate::values::{
    coerce_to_number, lift_elementwise, lift_with, Array, ErrorKind, Operand, Scalar, Value,
    XlError,
};

pub type EagerFn = fn(&mut Evaluator<'_>, Vec<Value>) -> Value;
pub type LazyFn = fn(&mut Evaluator<'_>, &[Expr], &Env) -> Value;

#[derive(Clone, Copy)]
pub enum BuiltinKind {
    /// Receives evaluated arguments; references are not yet dereferenced.
    Eager(EagerFn),
    /// Receives argument expressions and decides what to evaluate.
    Lazy(LazyFn),
}

pub struct Builtin {
    pub name: &'static str,
    pub min: usize,
    pub max: Option<usize>,
    pub kind: BuiltinKind,
}

impl Builtin {
    pub fn arity_text(&self) -> String {
        match self.max {
            Some(m) if m == self.min => format!("{m}"),
            Some(m) => format!("{}..{m}", self.min),
            None => format!("{}+", self.min),
        }
    }
}

const fn eager(name: &'static str, min: usize, max: Option<usize>, f: EagerFn) -> Builtin {
    Builtin {
        name,
        min,
        max,
        kind: BuiltinKind::Eager(f),
    }
}

const fn lazy(name: &'static str, min: usize, max: Option<usize>, f: LazyFn) -> Builtin {
    Builtin {
        name,
        min,
        max,
        kind: BuiltinKind::Lazy(f),
    }
}

static BUILTINS: &[Builtin] = &[
    // helpers
    eager("MAP", 2, None, helpers::map),
    eager("BYROW", 2, Some(2), helpers::byrow),
    eager("BYCOL", 2, Some(2), helpers::bycol),
    eager("SCAN", 3, Some(3), helpers::scan),
    eager("REDUCE", 3, Some(3), helpers::reduce),
    eager("MAKEARRAY", 3, Some(3), helpers::makearray),
    // shaping
    eager("VSTACK", 1, None, shape::vstack),
    eager("HSTACK", 1, None, shape::hstack),
    eager("TAKE", 2, Some(3), shape::take),
    eager("DROP", 2, Some(3), shape::drop),
    eager("WRAPROWS", 2, Some(3), shape::wraprows),
    eager("TOCOL", 1, Some(3), shape::tocol),
    eager("TOROW", 1, Some(3), shape::torow),
    eager("TRANSPOSE", 1, Some(1), shape::transpose),
    eager("SEQUENCE", 1, Some(4), shape::sequence),
    eager("FILTER", 2, Some(3), shape::filter),
    eager("SORT", 1, Some(4), shape::sort),
    // math
    eager("SUM", 1, None, math::sum),
    eager("COUNT", 1, None, math::count),
    eager("AVERAGE", 1, None, math::average),
    eager("MIN", 1, None, math::min),
    eager("MAX", 1, None, math::max),
    eager("PRODUCT", 1, None, math::product),
    eager("MOD", 2, Some(2), math::modulo),
    eager("QUOTIENT", 2, Some(2), math::quotient),
    eager("ABS", 1, Some(1), math::abs),
    eager("SQRT", 1, Some(1), math::sqrt),
    eager("EXP", 1, Some(1), math::exp),
    eager("LN", 1, Some(1), math::ln),
    eager("SIN", 1, Some(1), math::sin),
    eager("COS", 1, Some(1), math::cos),
    eager("PI", 0, Some(0), math::pi),
    eager("ROUND", 2, Some(2), math::round),
    eager("INT", 1, Some(1), math::int),
    eager("POWER", 2, Some(2), math::power),
    eager("MMULT", 2, Some(2), math::mmult),
    // logic
    lazy("IF", 2, Some(3), logic::if_),
    lazy("IFERROR", 2, Some(2), logic::iferror),
    eager("AND", 1, None, logic::and),
    eager("OR", 1, None, logic::or),
    eager("NOT", 1, Some(1), logic::not),
    eager("ISERROR", 1, Some(1), logic::iserror),
    eager("ISNUMBER", 1, Some(1), logic::isnumber),
    eager("ISOMITTED", 1, Some(1), logic::isomitted),
    // lookup and reference
    eager("INDEX", 2, Some(3), lookup::index),
    eager("ROW", 0, Some(1), lookup::row),
    eager("COLUMN", 0, Some(1), lookup::column),
    eager("ROWS", 1, Some(1), lookup::rows),
    eager("COLUMNS", 1, Some(1), lookup::columns),
    // dates
    eager("DATE", 3, Some(3), dates::date),
    eager("EOMONTH", 2, Some(2), dates::eomonth),
    eager("YEAR", 1, Some(1), dates::year),
    eager("MONTH", 1, Some(1), dates::month),
    eager("DAY", 1, Some(1), dates::day),
];

fn index() -> &'static HashMap<&'static str, &'static Builtin> {
    static INDEX: OnceLock<HashMap<&'static str, &'static Builtin>> = OnceLock::new();
    INDEX.get_or_init(|| BUILTINS.iter().map(|b| (b.name, b)).collect())
}

/// Looks up a built-in by upper-cased name.
pub fn lookup(key: &str) -> Option<&'static Builtin> {
    index().get(key).copied()
}

/// All built-ins, sorted by name.
pub fn registry() -> Vec<&'static Builtin> {
    let mut all: Vec<&Builtin> = BUILTINS.iter().collect();
    all.sort_by_key(|b| b.name);
    all
}

// ---- argument helpers ----

fn err(kind: ErrorKind, detail: impl Into<String>) -> XlError {
    XlError::with_detail(kind, detail)
}

/// Any argument as an array; scalars (errors included) become 1x1.
pub(crate) fn to_array(ev: &Evaluator<'_>, v: Value) -> Result<Arc<Array>, XlError> {
    match ev.deref(v) {
        Value::Array(a) => Ok(a),
        Value::Scalar(s) => Ok(Arc::new(Array::new(1, 1, vec![s]))),
        Value::Omitted => Ok(Arc::new(Array::new(1, 1, vec![Scalar::Empty]))),
        Value::Lambda(_) => Err(err(ErrorKind::Value, "expected an array, got a LAMBDA")),
        Value::Ref(_) => unreachable!("deref removes references"),
    }
}

/// Like `to_array`, but a scalar error argument is returned as the error.
pub(crate) fn data_array(ev: &Evaluator<'_>, v: Value) -> Result<Arc<Array>, XlError> {
    match ev.deref(v) {
        Value::Scalar(Scalar::Error(e)) => Err(e),
        other => to_array(ev, other),
    }
}

/// A single value: a scalar, a one-cell reference or a 1x1 array.
pub(crate) fn to_scalar(ev: &Evaluator<'_>, v: Value) -> Result<Scalar, XlError> {
    match ev.deref(v) {
        Value::Scalar(s) => Ok(s),
        Value::Omitted => Ok(Scalar::Empty),
        Value::Array(a) if a.len() == 1 => Ok(a.get(0, 0).clone()),
        Value::Array(a) => Err(err(
            ErrorKind::Value,
            format!("expected a single value, got a {}x{} array", a.rows(), a.cols()),
        )),
        Value::Lambda(_) => Err(err(ErrorKind::Value, "expected a value, got a LAMBDA")),
        Value::Ref(_) => unreachable!("deref removes references"),
    }
}

pub(crate) fn to_number(ev: &Evaluator<'_>, v: Value) -> Result<f64, XlError> {
    let s = to_scalar(ev, v)?;
    if let Scalar::Error(e) = s {
        return Err(e);
    }
    coerce_to_number(&s)
}

/// Optional numeric argument; missing or omitted gives `default`.
pub(crate) fn opt_number(ev: &Evaluator<'_>, v: Option<Value>, default: f64) -> Result<f64, XlError> {
    match v {
        None | Some(Value::Omitted) => Ok(default),
        Some(v) => to_number(ev, v),
    }
}

pub(crate) fn to_closure(v: &Value) -> Result<Arc<Closure>, XlError> {
    match v {
        Value::Lambda(c) => Ok(c.clone()),
        Value::Scalar(Scalar::Error(e)) => Err(e.clone()),
        other => Err(err(
            ErrorKind::Value,
            format!("expected a LAMBDA, got a {}", other.type_name()),
        )),
    }
}

pub(crate) fn operands(ev: &Evaluator<'_>, args: Vec<Value>) -> Result<Vec<Operand>, XlError> {
    args.into_iter().map(|a| ev.operand(a)).collect()
}

/// Elementwise function of scalar arguments with error propagation.
pub(crate) fn lifted(ev: &Evaluator<'_>, args: Vec<Value>, f: impl Fn(&[Scalar]) -> Result<Scalar, XlError>) -> Value {
    match operands(ev, args) {
        Ok(ops) => lift_elementwise(&ops, |cells| f(cells).unwrap_or_else(Scalar::Error)),
        Err(e) => e.into(),
    }
}

/// Elementwise function that sees error cells itself.
pub(crate) fn lifted_raw(ev: &Evaluator<'_>, args: Vec<Value>, f: impl Fn(&[Scalar]) -> Scalar) -> Value {
    match operands(ev, args) {
        Ok(ops) => lift_with(&ops, f),
        Err(e) => e.into(),
    }
}

pub(crate) fn num_of(s: &Scalar) -> Result<f64, XlError> {
    coerce_to_number(s)
}

/// Turns an `Err` into an error value.
pub(crate) fn value_of(r: Result<Value, XlError>) -> Value {
    r.unwrap_or_else(Value::from)
}
