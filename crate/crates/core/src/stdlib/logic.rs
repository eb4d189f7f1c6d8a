use super::{err, lifted, lifted_raw, operands};
use crate::eval::{Env, Evaluator};
use crate::parser::Expr;
use crate::values::{coerce_to_bool, lift_with, ErrorKind, Operand, Scalar, Value, XlError};

/// Only the selected branch is evaluated when the condition is a single
/// value; an array condition evaluates both and selects per cell.
pub(super) fn if_(ev: &mut Evaluator<'_>, args: &[Expr], env: &Env) -> Value {
    let cond = ev.evaluate(&args[0], env);
    let cond = match ev.operand(cond) {
        Ok(c) => c,
        Err(e) => return e.into(),
    };
    let branch = |ev: &mut Evaluator<'_>, i: usize| -> Value {
        match args.get(i) {
            None => Value::Scalar(Scalar::Bool(false)),
            Some(Expr::Omitted) => Value::number(0.0),
            Some(e) => ev.evaluate(e, env),
        }
    };
    match cond {
        Operand::Scalar(s) => match coerce_to_bool(&s) {
            Ok(true) => branch(ev, 1),
            Ok(false) => branch(ev, 2),
            Err(e) => e.into(),
        },
        Operand::Array(a) => {
            let then = branch(ev, 1);
            let other = branch(ev, 2);
            let (t, o) = match (ev.operand(then), ev.operand(other)) {
                (Ok(t), Ok(o)) => (t, o),
                (Err(e), _) | (_, Err(e)) => return e.into(),
            };
            lift_with(&[Operand::Array(a), t, o], |c| match coerce_to_bool(&c[0]) {
                Ok(true) => c[1].clone(),
                Ok(false) => c[2].clone(),
                Err(e) => Scalar::Error(e),
            })
        }
    }
}

/// The fallback is only evaluated when some cell of the value is an error.
pub(super) fn iferror(ev: &mut Evaluator<'_>, args: &[Expr], env: &Env) -> Value {
    let v = ev.evaluate(&args[0], env);
    let v = match ev.operand(v) {
        Ok(v) => v,
        Err(e) => return e.into(),
    };
    let any_error = match &v {
        Operand::Scalar(s) => s.is_error(),
        Operand::Array(a) => a.iter().any(Scalar::is_error),
    };
    if !any_error {
        return match v {
            Operand::Scalar(s) => Value::Scalar(s),
            Operand::Array(a) => Value::Array(a),
        };
    }
    let alt = match &args[1] {
        Expr::Omitted => Value::number(0.0),
        e => ev.evaluate(e, env),
    };
    if let Operand::Scalar(_) = v {
        return ev.deref(alt);
    }
    let alt = match ev.operand(alt) {
        Ok(a) => a,
        Err(e) => return e.into(),
    };
    lift_with(&[v, alt], |c| if c[0].is_error() { c[1].clone() } else { c[0].clone() })
}

fn truth_values(ev: &Evaluator<'_>, args: Vec<Value>) -> Result<Vec<bool>, XlError> {
    let mut out = Vec::new();
    for a in args {
        match a {
            Value::Omitted => {}
            Value::Scalar(s) => match s {
                Scalar::Error(e) => return Err(e),
                Scalar::Empty => {}
                s => out.push(coerce_to_bool(&s)?),
            },
            other => {
                for op in operands(ev, vec![other])? {
                    let cells: Vec<Scalar> = match op {
                        Operand::Scalar(s) => vec![s],
                        Operand::Array(a) => a.cells().to_vec(),
                    };
                    for s in cells {
                        match s {
                            Scalar::Error(e) => return Err(e),
                            Scalar::Bool(b) => out.push(b),
                            Scalar::Number(n) | Scalar::Date(n) => out.push(n != 0.0),
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(err(ErrorKind::Value, "no logical values"));
    }
    Ok(out)
}

pub(super) fn and(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    match truth_values(ev, args) {
        Ok(v) => Value::Scalar(Scalar::Bool(v.iter().all(|b| *b))),
        Err(e) => e.into(),
    }
}

pub(super) fn or(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    match truth_values(ev, args) {
        Ok(v) => Value::Scalar(Scalar::Bool(v.iter().any(|b| *b))),
        Err(e) => e.into(),
    }
}

pub(super) fn not(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted(ev, args, |c| Ok(Scalar::Bool(!coerce_to_bool(&c[0])?)))
}

pub(super) fn iserror(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted_raw(ev, args, |c| Scalar::Bool(c[0].is_error()))
}

pub(super) fn isnumber(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted_raw(ev, args, |c| Scalar::Bool(c[0].is_numeric()))
}

pub(super) fn isomitted(_ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    Value::Scalar(Scalar::Bool(matches!(args[0], Value::Omitted)))
}
