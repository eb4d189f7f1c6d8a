use super::{err, lifted, num_of};
use crate::dates as cal;
use crate::eval::Evaluator;
use crate::values::{ErrorKind, Scalar, Value, XlError};

fn out_of_range() -> XlError {
    err(ErrorKind::Num, "date outside the supported range")
}

pub(super) fn date(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted(ev, args, |c| {
        let mut y = num_of(&c[0])?.trunc() as i64;
        if (0..1900).contains(&y) {
            y += 1900;
        }
        let m = num_of(&c[1])?.trunc() as i64;
        let d = num_of(&c[2])?.trunc() as i64;
        cal::date_from_parts(y, m, d)
            .map(Scalar::Date)
            .ok_or_else(out_of_range)
    })
}

pub(super) fn eomonth(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    lifted(ev, args, |c| {
        let d = num_of(&c[0])?;
        let k = num_of(&c[1])?.trunc() as i64;
        cal::eomonth(d, k).map(Scalar::Date).ok_or_else(out_of_range)
    })
}

fn field(ev: &Evaluator<'_>, args: Vec<Value>, f: fn(f64) -> Option<f64>) -> Value {
    lifted(ev, args, |c| {
        f(num_of(&c[0])?).map(Scalar::Number).ok_or_else(out_of_range)
    })
}

pub(super) fn year(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    field(ev, args, cal::year)
}

pub(super) fn month(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    field(ev, args, cal::month)
}

pub(super) fn day(ev: &mut Evaluator<'_>, args: Vec<Value>) -> Value {
    field(ev, args, cal::day)
}
