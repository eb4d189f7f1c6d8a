//! Functions that rearrange arrays without arithmetic.

use std::cmp::Ordering;

use super::{data_array, err, opt_number, to_array, to_number, value_of};
use crate::eval::Evaluator;
use crate::values::{cmp_text_ci, coerce_to_bool, Array, ErrorKind, Scalar, Value, XlError};

fn na() -> Scalar {
    Scalar::error(ErrorKind::NA)
}

fn empty_result(func: &str) -> XlError {
    err(ErrorKind::Calc, format!("{func} result is empty"))
}

pub(super) fn vstack(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of((|| {
        let parts: Vec<_> = args
            .into_iter()
            .map(|a| to_array(ev, a))
            .collect::<Result<_, _>>()?;
        let cols = parts.iter().map(|a| a.cols()).max().unwrap_or(1);
        let mut cells = Vec::new();
        for a in &parts {
            for r in 0..a.rows() {
                for c in 0..cols {
                    cells.push(if c < a.cols() { a.get(r, c).clone() } else { na() });
                }
            }
        }
        let rows = cells.len() / cols;
        Ok(Value::array(Array::new(rows, cols, cells)))
    })())
}

pub(super) fn hstack(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of((|| {
        let parts: Vec<_> = args
            .into_iter()
            .map(|a| to_array(ev, a))
            .collect::<Result<_, _>>()?;
        let rows = parts.iter().map(|a| a.rows()).max().unwrap_or(1);
        let cols: usize = parts.iter().map(|a| a.cols()).sum();
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for a in &parts {
                for c in 0..a.cols() {
                    cells.push(if r < a.rows() { a.get(r, c).clone() } else { na() });
                }
            }
        }
        Ok(Value::array(Array::new(rows, cols, cells)))
    })())
}

/// Signed count argument; `None` when omitted.
fn count_arg(ev: &Evaluator<'_>, v: Option<Value>) -> Result<Option<i64>, XlError> {
    match v {
        None | Some(Value::Omitted) => Ok(None),
        Some(v) => Ok(Some(to_number(ev, v)?.trunc() as i64)),
    }
}

/// Index range kept by TAKE (`take`) or DROP along an axis of length `len`.
fn keep_span(len: usize, n: Option<i64>, take: bool, func: &str) -> Result<(usize, usize), XlError> {
    let Some(n) = n else {
        return Ok((0, len));
    };
    let k = n.unsigned_abs() as usize;
    if k > len {
        return Err(err(
            ErrorKind::Value,
            format!("{func} of {n} exceeds the extent {len}"),
        ));
    }
    let span = match (take, n >= 0) {
        (true, true) => (0, k),
        (true, false) => (len - k, len),
        (false, true) => (k, len),
        (false, false) => (0, len - k),
    };
    if span.0 == span.1 {
        return Err(empty_result(func));
    }
    Ok(span)
}

fn take_drop(ev: &mut Evaluator<'_>, args: Vec<Value>, take: bool) -> Value {
    let func = if take { "TAKE" } else { "DROP" };
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let rows = args.next();
    let cols = args.next();
    value_of((|| {
        let a = data_array(ev, data)?;
        let rn = count_arg(ev, rows)?;
        let cn = count_arg(ev, cols)?;
        let (r0, r1) = keep_span(a.rows(), rn, take, func)?;
        let (c0, c1) = keep_span(a.cols(), cn, take, func)?;
        Ok(Value::array(Array::from_fn(r1 - r0, c1 - c0, |r, c| {
            a.get(r0 + r, c0 + c).clone()
        })))
    })())
}

pub(super) fn take(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    take_drop(ev, args, true)
}

pub(super) fn drop(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    take_drop(ev, args, false)
}

pub(super) fn wraprows(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let width = args.next().expect("arity checked");
    let pad = args.next();
    value_of((|| {
        let a = data_array(ev, data)?;
        if !a.is_vector() {
            return Err(err(ErrorKind::Value, "WRAPROWS needs a single row or column"));
        }
        let w = to_number(ev, width)?.trunc();
        if w < 1.0 {
            return Err(err(ErrorKind::Value, "WRAPROWS width must be at least 1"));
        }
        let w = w as usize;
        let pad = match pad {
            None | Some(Value::Omitted) => na(),
            Some(p) => super::to_scalar(ev, p)?,
        };
        let n = a.len();
        let rows = n.div_ceil(w);
        Ok(Value::array(Array::from_fn(rows, w, |r, c| {
            a.cells().get(r * w + c).cloned().unwrap_or_else(|| pad.clone())
        })))
    })())
}

/// Cells in row-major order (or column-major), optionally dropping blanks
/// (`ignore` 1), errors (2) or both (3).
fn flatten(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Result<Vec<Scalar>, XlError> {
    let mut args = args.into_iter();
    let a = data_array(ev, args.next().expect("arity checked"))?;
    let ignore = opt_number(ev, args.next(), 0.0)?;
    let by_col = match args.next() {
        None | Some(Value::Omitted) => false,
        Some(v) => coerce_to_bool(&super::to_scalar(ev, v)?)?,
    };
    let ignore = ignore as i64;
    if !(0..=3).contains(&ignore) {
        return Err(err(ErrorKind::Value, "ignore must be 0..3"));
    }
    let src = if by_col { a.transpose() } else { (*a).clone() };
    let cells: Vec<Scalar> = src
        .into_cells()
        .into_iter()
        .filter(|s| match s {
            Scalar::Empty => ignore & 1 == 0,
            Scalar::Error(_) => ignore & 2 == 0,
            _ => true,
        })
        .collect();
    if cells.is_empty() {
        return Err(empty_result("TOCOL/TOROW"));
    }
    Ok(cells)
}

pub(super) fn tocol(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(flatten(ev, args).map(|c| Value::array(Array::column(c))))
}

pub(super) fn torow(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(flatten(ev, args).map(|c| Value::array(Array::row(c))))
}

pub(super) fn transpose(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let v = args.into_iter().next().expect("arity checked");
    value_of(data_array(ev, v).map(|a| Value::array(a.transpose())))
}

pub(super) fn sequence(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let rows = args.next();
    let cols = args.next();
    let start = args.next();
    let step = args.next();
    value_of((|| {
        let rows = opt_number(ev, rows, 1.0)?.trunc();
        let cols = opt_number(ev, cols, 1.0)?.trunc();
        if rows < 1.0 || cols < 1.0 {
            return Err(err(ErrorKind::Value, "SEQUENCE dimensions must be at least 1"));
        }
        if rows * cols > 1.0e8 {
            return Err(err(ErrorKind::Num, "SEQUENCE is too large"));
        }
        let start = opt_number(ev, start, 1.0)?;
        let step = opt_number(ev, step, 1.0)?;
        let cols_u = cols as usize;
        Ok(Value::array(Array::from_fn(rows as usize, cols_u, |r, c| {
            Scalar::number(start + step * (r * cols_u + c) as f64)
        })))
    })())
}

pub(super) fn filter(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let include = args.next().expect("arity checked");
    let if_empty = args.next();
    value_of((|| {
        let a = data_array(ev, data)?;
        let inc = data_array(ev, include)?;
        let by_rows = if inc.cols() == 1 && inc.rows() == a.rows() {
            true
        } else if inc.rows() == 1 && inc.cols() == a.cols() {
            false
        } else {
            return Err(err(
                ErrorKind::Value,
                format!(
                    "FILTER include is {}x{} but the array is {}x{}",
                    inc.rows(),
                    inc.cols(),
                    a.rows(),
                    a.cols()
                ),
            ));
        };
        let mut keep = Vec::with_capacity(inc.len());
        for s in inc.iter() {
            if let Scalar::Error(e) = s {
                return Err(e.clone());
            }
            keep.push(coerce_to_bool(s)?);
        }
        let kept: Vec<usize> = keep.iter().enumerate().filter(|(_, k)| **k).map(|(i, _)| i).collect();
        if kept.is_empty() {
            return match if_empty {
                Some(v) if !matches!(v, Value::Omitted) => Ok(ev.deref(v)),
                _ => Err(empty_result("FILTER")),
            };
        }
        Ok(Value::array(if by_rows {
            Array::from_fn(kept.len(), a.cols(), |r, c| a.get(kept[r], c).clone())
        } else {
            Array::from_fn(a.rows(), kept.len(), |r, c| a.get(r, kept[c]).clone())
        }))
    })())
}

/// Collation class: numbers, text, booleans, then blanks and errors.
fn class(s: &Scalar) -> u8 {
    match s {
        Scalar::Number(_) | Scalar::Date(_) => 0,
        Scalar::Text(_) => 1,
        Scalar::Bool(_) => 2,
        Scalar::Empty => 3,
        Scalar::Error(_) => 4,
    }
}

/// Sort key comparison. Blanks and errors stay last in either direction.
pub(crate) fn sort_cmp(a: &Scalar, b: &Scalar, descending: bool) -> Ordering {
    let (ca, cb) = (class(a), class(b));
    if ca >= 3 || cb >= 3 {
        return ca.cmp(&cb);
    }
    let ord = match (a, b) {
        _ if ca != cb => ca.cmp(&cb),
        (Scalar::Text(x), Scalar::Text(y)) => cmp_text_ci(x, y),
        (Scalar::Bool(x), Scalar::Bool(y)) => x.cmp(y),
        _ => {
            let (x, y) = (a.as_f64().unwrap_or(0.0), b.as_f64().unwrap_or(0.0));
            x.partial_cmp(&y).unwrap_or(Ordering::Equal)
        }
    };
    if descending {
        ord.reverse()
    } else {
        ord
    }
}

pub(super) fn sort(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let data = args.next().expect("arity checked");
    let index = args.next();
    let order = args.next();
    let by_col = args.next();
    value_of((|| {
        let a = data_array(ev, data)?;
        let by_col = match by_col {
            None | Some(Value::Omitted) => false,
            Some(v) => coerce_to_bool(&super::to_scalar(ev, v)?)?,
        };
        let a = if by_col { a.transpose() } else { (*a).clone() };
        let idx = opt_number(ev, index, 1.0)?.trunc();
        if idx < 1.0 || idx as usize > a.cols() {
            return Err(err(ErrorKind::Value, format!("SORT index {idx} is outside 1..{}", a.cols())));
        }
        let key = idx as usize - 1;
        let order = opt_number(ev, order, 1.0)?;
        let descending = match order {
            1.0 => false,
            -1.0 => true,
            _ => return Err(err(ErrorKind::Value, "SORT order must be 1 or -1")),
        };
        let mut rows: Vec<usize> = (0..a.rows()).collect();
        rows.sort_by(|&x, &y| sort_cmp(a.get(x, key), a.get(y, key), descending));
        let out = Array::from_fn(a.rows(), a.cols(), |r, c| a.get(rows[r], c).clone());
        Ok(Value::array(if by_col { out.transpose() } else { out }))
    })())
}
