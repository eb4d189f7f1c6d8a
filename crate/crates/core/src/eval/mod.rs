//! Expression evaluation over an environment chain and a grid resolver.

mod env;
mod ops;
mod trace;

use std::fmt;
use std::sync::Arc;

pub use env::Env;
pub(crate) use ops::scalar_binary;
use env::{name_key, Slot};
pub use trace::Trace;

use crate::engine::{CellAddress, Reference, SheetId};
use crate::parser::{Expr, Literal, Param};
use crate::stdlib::{self, BuiltinKind};
use crate::values::{Array, ErrorKind, Operand, Scalar, Value, XlError};

pub const DEFAULT_MAX_RECURSION: usize = 1024;

/// What the evaluator needs from the surrounding workbook.
pub trait Resolver {
    fn sheet_by_name(&self, name: &str) -> Option<SheetId>;
    fn sheet_name(&self, id: SheetId) -> String;
    fn cell_value(&self, addr: CellAddress) -> Scalar;
    /// Extent of the spill anchored at `anchor`, or `#REF!`.
    fn spill_range(&self, anchor: CellAddress) -> Result<Reference, XlError>;
    /// Defined name by upper-cased key: display spelling and formula.
    fn defined_name(&self, key: &str) -> Option<(String, Arc<Expr>)>;
}

/// A resolver with an empty grid and no names.
pub struct NoGrid;

impl Resolver for NoGrid {
    fn sheet_by_name(&self, _name: &str) -> Option<SheetId> {
        None
    }
    fn sheet_name(&self, _id: SheetId) -> String {
        "Sheet1".into()
    }
    fn cell_value(&self, _addr: CellAddress) -> Scalar {
        Scalar::Empty
    }
    fn spill_range(&self, _anchor: CellAddress) -> Result<Reference, XlError> {
        Err(XlError::with_detail(ErrorKind::Ref, "no grid"))
    }
    fn defined_name(&self, _key: &str) -> Option<(String, Arc<Expr>)> {
        None
    }
}

/// A LAMBDA value: parameters, body, and the environment it was created in.
pub struct Closure {
    pub params: Vec<Param>,
    pub body: Arc<Expr>,
    pub env: Env,
}

impl Closure {
    pub fn required(&self) -> usize {
        self.params.iter().filter(|p| !p.optional).count()
    }

    /// Whether a call with `n` arguments is well-formed.
    pub fn accepts(&self, n: usize) -> bool {
        n >= self.required() && n <= self.params.len()
    }
}

impl PartialEq for Closure {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && Arc::ptr_eq(&self.body, &other.body) && self.env.ptr_eq(&other.env)
    }
}

impl fmt::Debug for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        write!(f, "LAMBDA({})", names.join(", "))
    }
}

pub struct Evaluator<'a> {
    resolver: &'a dyn Resolver,
    caller: Option<CellAddress>,
    sheet: SheetId,
    scope: String,
    depth: usize,
    limit: usize,
    trace: &'a mut Trace,
    active_names: Vec<String>,
    // Set once the depth limit is hit; unwinds the whole evaluation.
    abort: Option<XlError>,
}

impl<'a> Evaluator<'a> {
    /// `caller` is the cell being computed, if any; unqualified references
    /// resolve against `sheet`.
    pub fn new(
        resolver: &'a dyn Resolver,
        sheet: SheetId,
        caller: Option<CellAddress>,
        limit: usize,
        trace: &'a mut Trace,
    ) -> Self {
        let scope = match caller {
            Some(a) => format!("{}!{}", resolver.sheet_name(a.sheet), a.a1()),
            None => "repl".to_string(),
        };
        Evaluator {
            resolver,
            caller,
            sheet,
            scope,
            depth: 0,
            limit,
            trace,
            active_names: Vec::new(),
            abort: None,
        }
    }

    pub fn caller(&self) -> Option<CellAddress> {
        self.caller
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Evaluates a top-level formula.
    pub fn eval_formula(&mut self, expr: &Expr) -> Value {
        self.abort = None;
        let v = self.evaluate(expr, &Env::root());
        match self.abort.take() {
            Some(e) => Value::from(e),
            None => v,
        }
    }

    pub fn evaluate(&mut self, expr: &Expr, env: &Env) -> Value {
        if let Some(e) = &self.abort {
            return Value::from(e.clone());
        }
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.eval_inner(expr, env))
    }

    fn eval_inner(&mut self, expr: &Expr, env: &Env) -> Value {
        match expr {
            Expr::Number(n) => Value::number(*n),
            Expr::Text(s) => Value::Scalar(Scalar::text(s)),
            Expr::Bool(b) => Value::Scalar(Scalar::Bool(*b)),
            Expr::Error(k) => Value::error(*k),
            Expr::Array(rows) => {
                let cells = rows
                    .iter()
                    .map(|row| row.iter().map(literal_scalar).collect())
                    .collect();
                match Array::from_rows(cells) {
                    Some(a) => Value::array(a),
                    None => Value::error(ErrorKind::Value),
                }
            }
            Expr::Cell(c) => match self.sheet_of(c.sheet.as_deref()) {
                Ok(sheet) => Value::Ref(Reference::cell(CellAddress::new(
                    sheet,
                    c.coord.row,
                    c.coord.col,
                ))),
                Err(e) => e.into(),
            },
            Expr::Range(r) => match self.sheet_of(r.sheet.as_deref()) {
                Ok(sheet) => Value::Ref(Reference {
                    sheet,
                    top: r.start.row,
                    left: r.start.col,
                    bottom: r.end.row,
                    right: r.end.col,
                }),
                Err(e) => e.into(),
            },
            Expr::Name(n) => self.resolve_name(n, env),
            Expr::Spill(inner) => self.eval_spill(inner, env),
            Expr::Intersect(inner) => {
                let v = self.evaluate(inner, env);
                self.intersect(v)
            }
            Expr::Call { callee, args } => self.eval_call(callee, args, env),
            Expr::Omitted => Value::Omitted,
            Expr::Let { bindings, body } => self.eval_let(bindings, body, env),
            Expr::Lambda { params, body } => Value::Lambda(Arc::new(Closure {
                params: params.clone(),
                body: body.clone(),
                env: env.clone(),
            })),
            Expr::Binary { op, lhs, rhs } => {
                let l = self.evaluate(lhs, env);
                let r = self.evaluate(rhs, env);
                match (self.operand(l), self.operand(r)) {
                    (Ok(l), Ok(r)) => ops::binary(*op, &l, &r),
                    (Err(e), _) | (_, Err(e)) => e.into(),
                }
            }
            Expr::Unary { op, operand } => {
                let v = self.evaluate(operand, env);
                match self.operand(v) {
                    Ok(x) => ops::unary(*op, &x),
                    Err(e) => e.into(),
                }
            }
            Expr::Percent(inner) => {
                let v = self.evaluate(inner, env);
                match self.operand(v) {
                    Ok(x) => ops::percent(&x),
                    Err(e) => e.into(),
                }
            }
        }
    }

    fn sheet_of(&self, name: Option<&str>) -> Result<SheetId, XlError> {
        match name {
            None => Ok(self.sheet),
            Some(n) => self
                .resolver
                .sheet_by_name(n)
                .ok_or_else(|| XlError::with_detail(ErrorKind::Ref, format!("unknown sheet {n}"))),
        }
    }

    fn resolve_name(&mut self, name: &str, env: &Env) -> Value {
        let key = name_key(name);
        if let Some(frame) = env.lookup(&key) {
            let frame = frame.clone();
            return self.force(&frame);
        }
        if let Some((display, formula)) = self.resolver.defined_name(&key) {
            return self.eval_defined(&key, &display, &formula);
        }
        if stdlib::lookup(&key).is_some() {
            return Value::err_detail(ErrorKind::Name, format!("function {name} used as a value"));
        }
        Value::err_detail(ErrorKind::Name, format!("unknown name {name}"))
    }

    fn force(&mut self, frame: &Arc<env::Frame>) -> Value {
        let expr = {
            let mut slot = frame.slot.lock().unwrap();
            match &*slot {
                Slot::Ready(v) => return v.clone(),
                Slot::InProgress => {
                    return Value::err_detail(
                        ErrorKind::Name,
                        format!("self-reference in binding {}", frame.name),
                    )
                }
                Slot::Pending(e) => {
                    let e = e.clone();
                    *slot = Slot::InProgress;
                    e
                }
            }
        };
        let scope = self.scope.clone();
        self.trace.record(&scope, &frame.name);
        let v = self.evaluate(&expr, &Env::at(frame));
        *frame.slot.lock().unwrap() = Slot::Ready(v.clone());
        v
    }

    fn eval_defined(&mut self, key: &str, display: &str, formula: &Expr) -> Value {
        if self.active_names.iter().any(|n| n == key) {
            return Value::err_detail(ErrorKind::Circular, format!("name {display} refers to itself"));
        }
        self.trace.record("name", display);
        self.active_names.push(key.to_string());
        let v = self.evaluate(formula, &Env::root());
        self.active_names.pop();
        v
    }

    fn eval_spill(&mut self, inner: &Expr, env: &Env) -> Value {
        let target = self.evaluate(inner, env);
        let anchor = match target {
            Value::Ref(r) => r.top_left(),
            Value::Scalar(Scalar::Error(e)) => return e.into(),
            _ => return Value::err_detail(ErrorKind::Ref, "spill reference needs a cell"),
        };
        match self.resolver.spill_range(anchor) {
            Ok(r) => Value::Ref(r),
            Err(e) => e.into(),
        }
    }

    fn eval_let(&mut self, bindings: &[(String, Arc<Expr>)], body: &Expr, env: &Env) -> Value {
        let mut inner = env.clone();
        for (name, expr) in bindings {
            inner = inner.bind_lazy(name, expr.clone());
        }
        self.evaluate(body, &inner)
    }

    fn eval_call(&mut self, callee: &Expr, args: &[Expr], env: &Env) -> Value {
        if let Expr::Name(name) = callee {
            let key = name_key(name);
            let builtin = stdlib::lookup(&key);
            if let (Some(frame), Some(b)) = (env.lookup(&key), builtin) {
                // A local spelled like a built-in is only called when it
                // holds a function, so `LET(year, YEAR(d), ...)` works.
                let frame = frame.clone();
                let busy = matches!(*frame.slot.lock().unwrap(), Slot::InProgress);
                if busy {
                    return self.call_builtin(b, args, env);
                }
                return match self.force(&frame) {
                    Value::Lambda(c) => {
                        let vals: Vec<Value> = args.iter().map(|a| self.evaluate(a, env)).collect();
                        self.apply_closure(&c, vals)
                    }
                    _ => self.call_builtin(b, args, env),
                };
            }
            if env.lookup(&key).is_none() && self.resolver.defined_name(&key).is_none() {
                return match builtin {
                    Some(b) => self.call_builtin(b, args, env),
                    None => Value::err_detail(ErrorKind::Name, format!("unknown function {name}")),
                };
            }
        }
        let f = self.evaluate(callee, env);
        match f {
            Value::Lambda(c) => {
                let vals: Vec<Value> = args.iter().map(|a| self.evaluate(a, env)).collect();
                self.apply_closure(&c, vals)
            }
            Value::Scalar(Scalar::Error(e)) => e.into(),
            other => Value::err_detail(
                ErrorKind::Value,
                format!("cannot call a {}", other.type_name()),
            ),
        }
    }

    fn call_builtin(&mut self, b: &stdlib::Builtin, args: &[Expr], env: &Env) -> Value {
        if args.len() < b.min || b.max.is_some_and(|m| args.len() > m) {
            return Value::err_detail(
                ErrorKind::Value,
                format!("{} takes {}, got {}", b.name, b.arity_text(), args.len()),
            );
        }
        match b.kind {
            BuiltinKind::Lazy(f) => f(self, args, env),
            BuiltinKind::Eager(f) => {
                let vals: Vec<Value> = args.iter().map(|a| self.evaluate(a, env)).collect();
                f(self, vals)
            }
        }
    }

    /// Applies a closure to already-evaluated arguments.
    pub fn apply_closure(&mut self, c: &Closure, args: Vec<Value>) -> Value {
        if let Some(e) = &self.abort {
            return Value::from(e.clone());
        }
        if args.len() > c.params.len() {
            return Value::err_detail(
                ErrorKind::Value,
                format!("{} arguments for {} parameters", args.len(), c.params.len()),
            );
        }
        if self.depth >= self.limit {
            let e = XlError::with_detail(ErrorKind::Num, "recursion limit");
            self.abort = Some(e.clone());
            return e.into();
        }
        let mut env = c.env.clone();
        let mut args = args.into_iter();
        for p in &c.params {
            let v = args.next().unwrap_or(Value::Omitted);
            if matches!(v, Value::Omitted) && !p.optional {
                return Value::err_detail(ErrorKind::Value, format!("missing argument {}", p.name));
            }
            env = env.bind_value(&p.name, v);
        }
        self.depth += 1;
        let v = self.evaluate(&c.body, &env);
        self.depth -= 1;
        v
    }

    /// Applies any callable value; non-lambdas give `#VALUE!`.
    pub fn apply(&mut self, f: &Value, args: Vec<Value>) -> Value {
        match f {
            Value::Lambda(c) => self.apply_closure(c, args),
            Value::Scalar(Scalar::Error(e)) => e.clone().into(),
            other => Value::err_detail(
                ErrorKind::Value,
                format!("expected a LAMBDA, got a {}", other.type_name()),
            ),
        }
    }

    /// Reads references from the grid; other values pass through.
    pub fn deref(&self, v: Value) -> Value {
        match v {
            Value::Ref(r) => self.read_ref(&r),
            other => other,
        }
    }

    pub fn read_ref(&self, r: &Reference) -> Value {
        if r.is_single_cell() {
            return Value::Scalar(self.resolver.cell_value(r.top_left()));
        }
        Value::array(Array::from_fn(r.rows(), r.cols(), |i, j| {
            self.resolver
                .cell_value(CellAddress::new(r.sheet, r.top + i as u32, r.left + j as u32))
        }))
    }

    /// Dereferenced operand for lifting. Omitted reads as empty; a lambda
    /// is not an operand.
    pub fn operand(&self, v: Value) -> Result<Operand, XlError> {
        match self.deref(v) {
            Value::Scalar(s) => Ok(Operand::Scalar(s)),
            Value::Array(a) => Ok(Operand::Array(a)),
            Value::Omitted => Ok(Operand::Scalar(Scalar::Empty)),
            Value::Lambda(_) => Err(XlError::with_detail(ErrorKind::Value, "LAMBDA used as a value")),
            Value::Ref(_) => unreachable!("deref removes references"),
        }
    }

    /// Implicit intersection against the calling cell.
    pub fn intersect(&self, v: Value) -> Value {
        match v {
            Value::Ref(r) => {
                if r.is_single_cell() {
                    return self.read_ref(&r);
                }
                let none = || Value::err_detail(ErrorKind::Value, format!("no intersection with {r}"));
                let Some(at) = self.caller else { return none() };
                let row = if r.rows() == 1 {
                    r.top
                } else if (r.top..=r.bottom).contains(&at.row) {
                    at.row
                } else {
                    return none();
                };
                let col = if r.cols() == 1 {
                    r.left
                } else if (r.left..=r.right).contains(&at.col) {
                    at.col
                } else {
                    return none();
                };
                Value::Scalar(self.resolver.cell_value(CellAddress::new(r.sheet, row, col)))
            }
            Value::Array(a) => Value::Scalar(a.get(0, 0).clone()),
            other => other,
        }
    }
}

fn literal_scalar(l: &Literal) -> Scalar {
    match l {
        Literal::Number(n) => Scalar::Number(*n),
        Literal::Text(s) => Scalar::text(s),
        Literal::Bool(b) => Scalar::Bool(*b),
        Literal::Error(k) => Scalar::error(*k),
    }
}

/// Evaluates formula text with no grid. Handy for tests and the REPL.
pub fn eval_standalone(src: &str) -> Result<Value, crate::parser::ParseError> {
    let expr = crate::parser::parse_formula(src)?;
    let mut trace = Trace::default();
    let mut ev = Evaluator::new(&NoGrid, SheetId(0), None, DEFAULT_MAX_RECURSION, &mut trace);
    let v = ev.eval_formula(&expr);
    Ok(ev.deref(v))
}
