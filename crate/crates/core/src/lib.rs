//! Batch spreadsheet formula engine: dynamic arrays with spill, LET and
//! LAMBDA closures with recursion, array helpers and a small numerics kernel.

pub mod cases;
pub mod dates;
pub mod engine;
pub mod eval;
pub mod numerics;
pub mod parser;
pub mod stdlib;
pub mod values;

pub use engine::{CalcReport, CellAddress, Config, Content, Reference, Workbook};
pub use eval::{eval_standalone, Trace};
pub use parser::{parse_formula, print_formula, Expr, ParseError};
pub use values::{Array, ErrorKind, Scalar, Value, XlError};
