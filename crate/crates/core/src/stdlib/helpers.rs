//! Functions that apply a LAMBDA over slices of an array.

use std::sync::Arc;

use super::{data_array, err, to_closure, to_number, to_scalar, value_of};
use crate::engine::Reference;
use crate::eval::{Closure, Evaluator};
use crate::values::{broadcast_shape, Array, ErrorKind, Operand, Scalar, Value, XlError};

/// A per-slice result must be a single value.
fn slice_result(ev: &Evaluator<'_>, v: Value) -> Scalar {
    match ev.deref(v) {
        Value::Scalar(Scalar::Empty) | Value::Omitted => Scalar::Number(0.0),
        Value::Scalar(s) => s,
        Value::Array(a) if a.len() == 1 => a.get(0, 0).clone(),
        Value::Array(a) => Scalar::Error(err(
            ErrorKind::Calc,
            format!("LAMBDA returned a {}x{} array where one value is needed", a.rows(), a.cols()),
        )),
        Value::Lambda(_) => Scalar::Error(err(ErrorKind::Calc, "LAMBDA returned a LAMBDA")),
        Value::Ref(_) => unreachable!("deref removes references"),
    }
}

fn check_arity(c: &Closure, n: usize, func: &str) -> Result<(), XlError> {
    if c.accepts(n) {
        Ok(())
    } else {
        Err(err(
            ErrorKind::Value,
            format!("{func} passes {n} argument(s) but the LAMBDA takes {}", c.params.len()),
        ))
    }
}

pub(super) fn map(ev: &mut Evaluator<'_>, mut args: Vec<Value>) -> Value {
    let f = args.pop().expect("arity checked");
    value_of((|| {
        let c = to_closure(&f)?;
        check_arity(&c, args.len(), "MAP")?;
        let mut all_scalar = true;
        let mut ops = Vec::with_capacity(args.len());
        for a in args {
            let op = ev.operand(a)?;
            all_scalar &= op.is_scalar();
            ops.push(op);
        }
        let (rows, cols) = ops.iter().map(Operand::shape).reduce(broadcast_shape).unwrap_or((1, 1));
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                let vals = ops.iter().map(|o| Value::Scalar(o.get(r, col))).collect();
                let v = ev.apply_closure(&c, vals);
                cells.push(slice_result(ev, v));
            }
        }
        if all_scalar {
            return Ok(Value::Scalar(cells.pop().expect("one cell")));
        }
        Ok(Value::array(Array::new(rows, cols, cells)))
    })())
}

/// Row or column slices of an argument. References slice into references so
/// the LAMBDA can still ask where its slice lives.
fn slices(ev: &Evaluator<'_>, v: Value, by_row: bool) -> Result<Vec<Value>, XlError> {
    if let Value::Ref(r) = v {
        let out = if by_row {
            (r.top..=r.bottom)
                .map(|row| Value::Ref(Reference { top: row, bottom: row, ..r }))
                .collect()
        } else {
            (r.left..=r.right)
                .map(|col| Value::Ref(Reference { left: col, right: col, ..r }))
                .collect()
        };
        return Ok(out);
    }
    let a = data_array(ev, v)?;
    Ok(if by_row {
        (0..a.rows()).map(|i| Value::array(a.row_slice(i))).collect()
    } else {
        (0..a.cols()).map(|j| Value::array(a.col_slice(j))).collect()
    })
}

fn by_axis(ev: &mut Evaluator<'_>, args: Vec<Value>, by_row: bool) -> Value {
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let f = args.next().expect("arity checked");
    value_of((|| {
        let c = to_closure(&f)?;
        check_arity(&c, 1, if by_row { "BYROW" } else { "BYCOL" })?;
        let parts = slices(ev, data, by_row)?;
        let cells: Vec<Scalar> = parts
            .into_iter()
            .map(|p| {
                let v = ev.apply_closure(&c, vec![p]);
                slice_result(ev, v)
            })
            .collect();
        Ok(Value::array(if by_row {
            Array::column(cells)
        } else {
            Array::row(cells)
        }))
    })())
}

pub(super) fn byrow(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    by_axis(ev, args, true)
}

pub(super) fn bycol(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    by_axis(ev, args, false)
}

fn initial(ev: &Evaluator<'_>, v: Value) -> Result<Value, XlError> {
    Ok(match v {
        Value::Omitted => Value::number(0.0),
        Value::Lambda(_) => return Err(err(ErrorKind::Value, "initial value is a LAMBDA")),
        other => ev.deref(other),
    })
}

pub(super) fn scan(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let (init, data, f) = (args.next().unwrap(), args.next().unwrap(), args.next().unwrap());
    value_of((|| {
        let c = to_closure(&f)?;
        check_arity(&c, 2, "SCAN")?;
        let mut acc = to_scalar(ev, initial(ev, init)?)?;
        let a = data_array(ev, data)?;
        let mut cells = Vec::with_capacity(a.len());
        for x in a.iter() {
            let v = ev.apply_closure(&c, vec![Value::Scalar(acc), Value::Scalar(x.clone())]);
            acc = slice_result(ev, v);
            cells.push(acc.clone());
        }
        Ok(Value::array(Array::new(a.rows(), a.cols(), cells)))
    })())
}

pub(super) fn reduce(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let (init, data, f) = (args.next().unwrap(), args.next().unwrap(), args.next().unwrap());
    value_of((|| {
        let c = to_closure(&f)?;
        check_arity(&c, 2, "REDUCE")?;
        let mut acc = initial(ev, init)?;
        let a = data_array(ev, data)?;
        for x in a.iter() {
            let next = ev.apply_closure(&c, vec![acc, Value::Scalar(x.clone())]);
            acc = ev.deref(next);
            if let Some(e) = acc.as_error() {
                return Err(e.clone());
            }
        }
        Ok(match acc {
            Value::Scalar(Scalar::Empty) | Value::Omitted => Value::number(0.0),
            other => other,
        })
    })())
}

fn dimension(ev: &Evaluator<'_>, v: Value, what: &str) -> Result<usize, XlError> {
    let n = to_number(ev, v)?.trunc();
    if !(1.0..=1.0e7).contains(&n) {
        return Err(err(ErrorKind::Value, format!("{what} must be at least 1, got {n}")));
    }
    Ok(n as usize)
}

pub(super) fn makearray(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let (rows, cols, f) = (args.next().unwrap(), args.next().unwrap(), args.next().unwrap());
    value_of((|| {
        let rows = dimension(ev, rows, "rows")?;
        let cols = dimension(ev, cols, "columns")?;
        let c: Arc<Closure> = to_closure(&f)?;
        check_arity(&c, 2, "MAKEARRAY")?;
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 1..=rows {
            for col in 1..=cols {
                let v = ev.apply_closure(&c, vec![Value::number(r as f64), Value::number(col as f64)]);
                cells.push(slice_result(ev, v));
            }
        }
        Ok(Value::array(Array::new(rows, cols, cells)))
    })())
}
