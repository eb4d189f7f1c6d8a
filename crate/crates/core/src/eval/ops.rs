use std::cmp::Ordering;

use crate::parser::{BinOp, UnaryOp};
use crate::values::{
    coerce_to_number, coerce_to_text, compare_scalars, lift_elementwise, ErrorKind, Operand,
    Scalar, Value,
};

pub(super) fn binary(op: BinOp, l: &Operand, r: &Operand) -> Value {
    lift_elementwise(&[l.clone(), r.clone()], |cells| scalar_binary(op, &cells[0], &cells[1]))
}

pub(crate) fn scalar_binary(op: BinOp, a: &Scalar, b: &Scalar) -> Scalar {
    if let Some(e) = a.as_error().or(b.as_error()) {
        return Scalar::Error(e.clone());
    }
    match op {
        BinOp::Concat => match (coerce_to_text(a), coerce_to_text(b)) {
            (Ok(x), Ok(y)) => Scalar::text(x + &y),
            (Err(e), _) | (_, Err(e)) => Scalar::Error(e),
        },
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            match compare_scalars(a, b) {
                Ok(ord) => Scalar::Bool(match op {
                    BinOp::Eq => ord == Ordering::Equal,
                    BinOp::Ne => ord != Ordering::Equal,
                    BinOp::Lt => ord == Ordering::Less,
                    BinOp::Le => ord != Ordering::Greater,
                    BinOp::Gt => ord == Ordering::Greater,
                    _ => ord != Ordering::Less,
                }),
                Err(e) => Scalar::Error(e),
            }
        }
        _ => {
            let (x, y) = match (coerce_to_number(a), coerce_to_number(b)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return Scalar::Error(e),
            };
            let da = matches!(a, Scalar::Date(_));
            let db = matches!(b, Scalar::Date(_));
            match op {
                BinOp::Add if da != db => Scalar::date(x + y),
                BinOp::Sub if da && !db => Scalar::date(x - y),
                BinOp::Add => Scalar::number(x + y),
                BinOp::Sub => Scalar::number(x - y),
                BinOp::Mul => Scalar::number(x * y),
                BinOp::Div if y == 0.0 => Scalar::error(ErrorKind::Div0),
                BinOp::Div => Scalar::number(x / y),
                _ => power(x, y),
            }
        }
    }
}

fn power(x: f64, y: f64) -> Scalar {
    if x == 0.0 && y == 0.0 {
        return Scalar::error(ErrorKind::Num);
    }
    if x == 0.0 && y < 0.0 {
        return Scalar::error(ErrorKind::Div0);
    }
    Scalar::number(x.powf(y))
}

pub(super) fn unary(op: UnaryOp, x: &Operand) -> Value {
    lift_elementwise(std::slice::from_ref(x), |cells| {
        let s = &cells[0];
        match op {
            UnaryOp::Plus => s.clone(),
            UnaryOp::Neg => match coerce_to_number(s) {
                Ok(n) => Scalar::number(-n),
                Err(e) => Scalar::Error(e),
            },
        }
    })
}

pub(super) fn percent(x: &Operand) -> Value {
    lift_elementwise(std::slice::from_ref(x), |cells| match coerce_to_number(&cells[0]) {
        Ok(n) => Scalar::number(n / 100.0),
        Err(e) => Scalar::Error(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn date_provenance() {
        let d = Scalar::Date(41578.0);
        let n = Scalar::Number(1.0);
        assert_eq!(scalar_binary(BinOp::Add, &d, &n), Scalar::Date(41579.0));
        assert_eq!(scalar_binary(BinOp::Add, &n, &d), Scalar::Date(41579.0));
        assert_eq!(scalar_binary(BinOp::Sub, &d, &d), Scalar::Number(0.0));
        assert_eq!(scalar_binary(BinOp::Mul, &d, &n), Scalar::Number(41578.0));
    }

    #[test]
    fn arithmetic_errors() {
        let z = Scalar::Number(0.0);
        let one = Scalar::Number(1.0);
        assert_eq!(scalar_binary(BinOp::Div, &one, &z), Scalar::error(ErrorKind::Div0));
        assert_eq!(scalar_binary(BinOp::Pow, &z, &z), Scalar::error(ErrorKind::Num));
        assert_eq!(
            scalar_binary(BinOp::Pow, &Scalar::Number(-8.0), &Scalar::Number(0.5)),
            Scalar::error(ErrorKind::Num)
        );
        assert_eq!(
            scalar_binary(BinOp::Add, &Scalar::text("x"), &one),
            Scalar::error(ErrorKind::Value)
        );
    }

    #[test]
    fn concat_and_compare() {
        assert_eq!(
            scalar_binary(BinOp::Concat, &Scalar::text("a"), &Scalar::Number(1.5)),
            Scalar::text("a1.5")
        );
        assert_eq!(
            scalar_binary(BinOp::Eq, &Scalar::text("ABC"), &Scalar::text("abc")),
            Scalar::Bool(true)
        );
        assert_eq!(
            scalar_binary(BinOp::Lt, &Scalar::Number(5.0), &Scalar::text("a")),
            Scalar::Bool(true)
        );
    }
}
