use super::{data_array, err, lifted, num_of, value_of};
use crate::eval::Evaluator;
use crate::values::{coerce_to_number, Array, ErrorKind, Scalar, Value, XlError};

/// Numbers taking part in a reduction. Cells of arrays and references count
/// only when numeric; direct scalar arguments are coerced. Errors anywhere
/// propagate.
fn numbers(ev: &Evaluator<'_>, args: Vec<Value>) -> Result<Vec<f64>, XlError> {
    let mut out = Vec::new();
    for a in args {
        match a {
            Value::Omitted => {}
            Value::Lambda(_) => return Err(err(ErrorKind::Value, "LAMBDA passed to a reduction")),
            Value::Scalar(s) => match s {
                Scalar::Error(e) => return Err(e),
                Scalar::Empty => {}
                s => out.push(coerce_to_number(&s)?),
            },
            v @ (Value::Ref(_) | Value::Array(_)) => {
                let arr = super::to_array(ev, v)?;
                for s in arr.iter() {
                    match s {
                        Scalar::Number(n) | Scalar::Date(n) => out.push(*n),
                        Scalar::Error(e) => return Err(e.clone()),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(out)
}

pub(super) fn sum(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(numbers(ev, args).map(|v| Value::number(v.iter().sum())))
}

/// Counts numbers. Unlike some spreadsheets, an error cell is not skipped
/// but propagates like in the other reductions.
pub(super) fn count(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut n = 0usize;
    for a in args {
        match a {
            Value::Scalar(Scalar::Error(e)) => return e.into(),
            Value::Scalar(s) => {
                let numeric_text = matches!(s, Scalar::Text(_)) && coerce_to_number(&s).is_ok();
                if s.is_numeric() || matches!(s, Scalar::Bool(_)) || numeric_text {
                    n += 1;
                }
            }
            Value::Omitted | Value::Lambda(_) => {}
            v => match super::to_array(ev, v) {
                Ok(arr) => {
                    for s in arr.iter() {
                        match s {
                            Scalar::Error(e) => return e.clone().into(),
                            s if s.is_numeric() => n += 1,
                            _ => {}
                        }
                    }
                }
                Err(e) => return e.into(),
            },
        }
    }
    Value::number(n as f64)
}

pub(super) fn average(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(numbers(ev, args).and_then(|v| {
        if v.is_empty() {
            Err(err(ErrorKind::Div0, "AVERAGE of no numbers"))
        } else {
            Ok(Value::number(v.iter().sum::<f64>() / v.len() as f64))
        }
    }))
}

pub(super) fn min(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(numbers(ev, args).map(|v| Value::number(v.into_iter().reduce(f64::min).unwrap_or(0.0))))
}

pub(super) fn max(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(numbers(ev, args).map(|v| Value::number(v.into_iter().reduce(f64::max).unwrap_or(0.0))))
}

pub(super) fn product(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    value_of(numbers(ev, args).map(|v| {
        if v.is_empty() {
            Value::number(0.0)
        } else {
            Value::number(v.iter().product())
        }
    }))
}

fn unary(ev: &Evaluator<'_>, args: Vec<Value>, f: fn(f64) -> Result<f64, XlError>) -> Value {
    lifted(ev, args, |c| Ok(Scalar::number(f(num_of(&c[0])?)?)))
}

fn binary(ev: &Evaluator<'_>, args: Vec<Value>, f: fn(f64, f64) -> Result<f64, XlError>) -> Value {
    lifted(ev, args, |c| Ok(Scalar::number(f(num_of(&c[0])?, num_of(&c[1])?)?)))
}

/// Remainder with the sign of the divisor.
pub fn excel_mod(a: f64, b: f64) -> Result<f64, XlError> {
    if b == 0.0 {
        return Err(err(ErrorKind::Div0, "MOD by zero"));
    }
    let r = a - b * (a / b).floor();
    // Guard against a remainder that rounds to the divisor itself.
    Ok(if r == b { 0.0 } else { r })
}

pub(super) fn modulo(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    binary(ev, args, excel_mod)
}

pub(super) fn quotient(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    binary(ev, args, |a, b| {
        if b == 0.0 {
            Err(err(ErrorKind::Div0, "QUOTIENT by zero"))
        } else {
            Ok((a / b).trunc())
        }
    })
}

pub(super) fn abs(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| Ok(x.abs()))
}

pub(super) fn sqrt(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| {
        if x < 0.0 {
            Err(err(ErrorKind::Num, "SQRT of a negative number"))
        } else {
            Ok(x.sqrt())
        }
    })
}

pub(super) fn exp(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| Ok(x.exp()))
}

pub(super) fn ln(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| {
        if x <= 0.0 {
            Err(err(ErrorKind::Num, "LN of a non-positive number"))
        } else {
            Ok(x.ln())
        }
    })
}

pub(super) fn sin(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| Ok(x.sin()))
}

pub(super) fn cos(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| Ok(x.cos()))
}

pub(super) fn pi(_ev: &mut Evaluator<'_>, _args: Vec<Value>) -> Value {
    Value::number(std::f64::consts::PI)
}

/// Half away from zero at `digits` decimals. The scaled value is first cut
/// to 15 significant digits so that decimal ties such as 2.675 round up.
pub fn round_half_away(x: f64, digits: i32) -> f64 {
    let m = 10f64.powi(digits.abs());
    let scaled = if digits >= 0 { x * m } else { x / m };
    let cleaned: f64 = format!("{scaled:.14e}").parse().unwrap_or(scaled);
    let r = cleaned.round();
    if digits >= 0 {
        r / m
    } else {
        r * m
    }
}

pub(super) fn round(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    binary(ev, args, |x, d| Ok(round_half_away(x, d.trunc() as i32)))
}

pub(super) fn int(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    unary(ev, args, |x| Ok(x.floor()))
}

pub(super) fn power(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted(ev, args, |c| {
        Ok(crate::eval::scalar_binary(crate::parser::BinOp::Pow, &c[0], &c[1]))
    })
}

pub(super) fn mmult(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    let mut args = args.into_iter();
    let (a, b) = (args.next().unwrap(), args.next().unwrap());
    value_of((|| {
        let a = data_array(ev, a)?;
        let b = data_array(ev, b)?;
        if a.cols() != b.rows() {
            return Err(err(
                ErrorKind::Value,
                format!("MMULT of {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
            ));
        }
        let numeric = |s: &Scalar| match s {
            Scalar::Number(n) | Scalar::Date(n) => Ok(*n),
            Scalar::Error(e) => Err(e.clone()),
            _ => Err(err(ErrorKind::Value, "MMULT needs numbers")),
        };
        let an: Vec<f64> = a.iter().map(numeric).collect::<Result<_, _>>()?;
        let bn: Vec<f64> = b.iter().map(numeric).collect::<Result<_, _>>()?;
        let (n, k, m) = (a.rows(), a.cols(), b.cols());
        Ok(Value::array(Array::from_fn(n, m, |i, j| {
            Scalar::number((0..k).map(|t| an[i * k + t] * bn[t * m + j]).sum())
        })))
    })())
}
