use std::sync::Arc;

use crate::values::ErrorKind;

/// Largest addressable row and column (1-based).
pub const MAX_ROWS: u32 = 1_048_576;
pub const MAX_COLS: u32 = 16_384;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellCoord {
    /// 1-based column index.
    pub col: u32,
    /// 1-based row index.
    pub row: u32,
    pub col_abs: bool,
    pub row_abs: bool,
}

impl CellCoord {
    pub fn new(col: u32, row: u32) -> Self {
        CellCoord {
            col,
            row,
            col_abs: false,
            row_abs: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub sheet: Option<String>,
    pub coord: CellCoord,
}

/// Rectangular reference; corners are normalized so `start` is top-left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RangeRef {
    pub sheet: Option<String>,
    pub start: CellCoord,
    pub end: CellCoord,
}

impl RangeRef {
    pub fn normalized(sheet: Option<String>, a: CellCoord, b: CellCoord) -> Self {
        let (c1, c1_abs, c2, c2_abs) = if a.col <= b.col {
            (a.col, a.col_abs, b.col, b.col_abs)
        } else {
            (b.col, b.col_abs, a.col, a.col_abs)
        };
        let (r1, r1_abs, r2, r2_abs) = if a.row <= b.row {
            (a.row, a.row_abs, b.row, b.row_abs)
        } else {
            (b.row, b.row_abs, a.row, a.row_abs)
        };
        RangeRef {
            sheet,
            start: CellCoord {
                col: c1,
                row: r1,
                col_abs: c1_abs,
                row_abs: r1_abs,
            },
            end: CellCoord {
                col: c2,
                row: r2,
                col_abs: c2_abs,
                row_abs: r2_abs,
            },
        }
    }
}

/// Array-literal element.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(ErrorKind),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub optional: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Concat => "&",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength; every binary operator is left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 1,
            BinOp::Concat => 2,
            BinOp::Add | BinOp::Sub => 3,
            BinOp::Mul | BinOp::Div => 4,
            BinOp::Pow => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
}

pub const PREC_UNARY: u8 = 6;
pub const PREC_PERCENT: u8 = 7;
pub const PREC_ATOM: u8 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(ErrorKind),
    /// Rows of literals, all the same length.
    Array(Vec<Vec<Literal>>),
    Cell(CellRef),
    Range(RangeRef),
    Name(String),
    /// `A1#` or `name#`; the inner expression is a `Cell` or `Name`.
    Spill(Box<Expr>),
    /// `@expr`.
    Intersect(Box<Expr>),
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    /// An empty argument slot, as in `SEQUENCE(4, , 0)`. Only appears in
    /// `Call` argument lists.
    Omitted,
    /// At least one binding and exactly one body.
    Let {
        bindings: Vec<(String, Arc<Expr>)>,
        body: Box<Expr>,
    },
    Lambda {
        params: Vec<Param>,
        body: Arc<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Percent(Box<Expr>),
}

impl Expr {
    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { .. } => PREC_UNARY,
            Expr::Percent(_) => PREC_PERCENT,
            _ => PREC_ATOM,
        }
    }

    pub fn name(n: impl Into<String>) -> Expr {
        Expr::Name(n.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(callee: &str, args: Vec<Expr>) -> Expr {
        Expr::Call {
            callee: Box::new(Expr::Name(callee.to_string())),
            args,
        }
    }

    /// Visits this node and every descendant, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Spill(e) | Expr::Intersect(e) | Expr::Percent(e) => e.walk(f),
            Expr::Unary { operand, .. } => operand.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Call { callee, args } => {
                callee.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            Expr::Let { bindings, body } => {
                for (_, b) in bindings {
                    b.walk(f);
                }
                body.walk(f);
            }
            Expr::Lambda { body, .. } => body.walk(f),
            _ => {}
        }
    }
}
