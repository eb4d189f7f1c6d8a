use super::{data_array, err, opt_number, value_of};
use crate::engine::Reference;
use crate::eval::Evaluator;
use crate::values::{Array, ErrorKind, Scalar, Value, XlError};

/// 1-based position along an axis of length `len`; 0 selects the whole axis.
fn position(n: f64, len: usize) -> Result<Option<usize>, XlError> {
    let n = n.trunc();
    if n < 0.0 || n > len as f64 {
        return Err(err(ErrorKind::Ref, format!("index {n} is outside 1..{len}")));
    }
    Ok(if n == 0.0 { None } else { Some(n as usize - 1) })
}

type Span = (usize, usize);

/// Resolves INDEX coordinates against a `rows` x `cols` extent into
/// inclusive 0-based spans.
fn spans(
    rows: usize,
    cols: usize,
    r: f64,
    c: Option<f64>,
) -> Result<(Span, Span), XlError> {
    let whole = |len: usize| (0, len - 1);
    let pick = |p: Option<usize>, len| p.map(|i| (i, i)).unwrap_or_else(|| whole(len));
    match c {
        // One index on a vector selects along its length.
        None if rows == 1 && cols > 1 => Ok(((0, 0), pick(position(r, cols)?, cols))),
        None => Ok((pick(position(r, rows)?, rows), whole(cols))),
        Some(c) => Ok((pick(position(r, rows)?, rows), pick(position(c, cols)?, cols))),
    }
}

/// INDEX into a reference stays a reference.
pub(super) fn index(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let r = args.next();
    let c = args.next();
    value_of((|| {
        let r = opt_number(ev, r, 0.0)?;
        let c = match c {
            None | Some(Value::Omitted) => None,
            Some(v) => Some(super::to_number(ev, v)?),
        };
        if let Value::Ref(rf) = data {
            let ((r0, r1), (c0, c1)) = spans(rf.rows(), rf.cols(), r, c)?;
            return Ok(Value::Ref(Reference {
                sheet: rf.sheet,
                top: rf.top + r0 as u32,
                bottom: rf.top + r1 as u32,
                left: rf.left + c0 as u32,
                right: rf.left + c1 as u32,
            }));
        }
        let a = data_array(ev, data)?;
        let ((r0, r1), (c0, c1)) = spans(a.rows(), a.cols(), r, c)?;
        if r0 == r1 && c0 == c1 {
            return Ok(Value::Scalar(a.get(r0, c0).clone()));
        }
        Ok(Value::array(Array::from_fn(r1 - r0 + 1, c1 - c0 + 1, |i, j| {
            a.get(r0 + i, c0 + j).clone()
        })))
    })())
}

fn position_of(ev: &Evaluator<'_>, args: Vec<Value>, rows: bool) -> Value {
    let r = match args.into_iter().next() {
        None | Some(Value::Omitted) => match ev.caller() {
            Some(a) => Reference::cell(a),
            None => return Value::err_detail(ErrorKind::Value, "no calling cell"),
        },
        Some(Value::Ref(r)) => r,
        Some(Value::Scalar(Scalar::Error(e))) => return e.into(),
        Some(_) => return Value::err_detail(ErrorKind::Value, "expected a reference"),
    };
    let nums = |from: u32, to: u32| (from..=to).map(|n| Scalar::Number(n as f64));
    if rows {
        if r.rows() == 1 {
            Value::number(r.top as f64)
        } else {
            Value::array(Array::column(nums(r.top, r.bottom)))
        }
    } else if r.cols() == 1 {
        Value::number(r.left as f64)
    } else {
        Value::array(Array::row(nums(r.left, r.right)))
    }
}

pub(super) fn row(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    position_of(ev, args, true)
}

pub(super) fn column(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    position_of(ev, args, false)
}

fn extent(ev: &Evaluator<'_>, v: Value) -> Result<(usize, usize), XlError> {
    match v {
        Value::Ref(r) => Ok((r.rows(), r.cols())),
        other => Ok(data_array(ev, other)?.shape()),
    }
}

pub(super) fn rows(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let v = args.into_iter().next().expect("arity checked");
    value_of(extent(ev, v).map(|(r, _)| Value::number(r as f64)))
}

pub(super) fn columns(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let v = args.into_iter().next().expect("arity checked");
    value_of(extent(ev, v).map(|(_, c)| Value::number(c as f64)))
}
