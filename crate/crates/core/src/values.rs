//! Runtime value universe: scalars, errors, rectangular arrays, closures,
//! plus the coercion and broadcasting rules shared by every operator.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::dates;
use crate::engine::Reference;
use crate::eval::Closure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    Div0,
    Value,
    Ref,
    Name,
    Num,
    NA,
    Calc,
    Spill,
    Circular,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 9] = [
        ErrorKind::Div0,
        ErrorKind::Value,
        ErrorKind::Ref,
        ErrorKind::Name,
        ErrorKind::Num,
        ErrorKind::NA,
        ErrorKind::Calc,
        ErrorKind::Spill,
        ErrorKind::Circular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Div0 => "#DIV/0!",
            ErrorKind::Value => "#VALUE!",
            ErrorKind::Ref => "#REF!",
            ErrorKind::Name => "#NAME?",
            ErrorKind::Num => "#NUM!",
            ErrorKind::NA => "#N/A",
            ErrorKind::Calc => "#CALC!",
            ErrorKind::Spill => "#SPILL!",
            ErrorKind::Circular => "#CIRC!",
        }
    }

    /// Case-insensitive lookup of the display string.
    pub fn parse(s: &str) -> Option<ErrorKind> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An error value with optional diagnostic text.
///
/// Two errors compare equal when their kinds match; the detail is for humans.
#[derive(Clone, Debug)]
pub struct XlError {
    pub kind: ErrorKind,
    pub detail: Option<Arc<str>>,
}

impl XlError {
    pub fn new(kind: ErrorKind) -> Self {
        XlError { kind, detail: None }
    }

    pub fn with_detail(kind: ErrorKind, detail: impl Into<String>) -> Self {
        XlError {
            kind,
            detail: Some(Arc::from(detail.into())),
        }
    }
}

impl PartialEq for XlError {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<ErrorKind> for XlError {
    fn from(kind: ErrorKind) -> Self {
        XlError::new(kind)
    }
}

impl fmt::Display for XlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.as_str())
    }
}

/// A single grid-storable datum.
///
/// `Date` is a number that was produced by a date function; it behaves as a
/// number everywhere and only differs in how it is displayed.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Empty,
    Number(f64),
    Date(f64),
    Text(Arc<str>),
    Bool(bool),
    Error(XlError),
}

impl Scalar {
    pub fn text(s: impl AsRef<str>) -> Self {
        Scalar::Text(Arc::from(s.as_ref()))
    }

    pub fn error(kind: ErrorKind) -> Self {
        Scalar::Error(XlError::new(kind))
    }

    /// Wraps a computed number, mapping NaN and infinities to `#NUM!`.
    pub fn number(n: f64) -> Self {
        if n.is_finite() {
            Scalar::Number(n)
        } else {
            Scalar::error(ErrorKind::Num)
        }
    }

    pub fn date(n: f64) -> Self {
        if n.is_finite() {
            Scalar::Date(n)
        } else {
            Scalar::error(ErrorKind::Num)
        }
    }

    /// The numeric payload of a `Number` or `Date`, without coercion.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Number(n) | Scalar::Date(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Scalar::Number(_) | Scalar::Date(_))
    }

    pub fn as_error(&self) -> Option<&XlError> {
        match self {
            Scalar::Error(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Scalar::Error(_))
    }
}

impl From<f64> for Scalar {
    fn from(n: f64) -> Self {
        Scalar::number(n)
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::text(s)
    }
}

impl From<XlError> for Scalar {
    fn from(e: XlError) -> Self {
        Scalar::Error(e)
    }
}

impl From<ErrorKind> for Scalar {
    fn from(k: ErrorKind) -> Self {
        Scalar::error(k)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Empty => Ok(()),
            Scalar::Number(n) => f.write_str(&format_number(*n)),
            Scalar::Date(n) => match dates::serial_to_iso(*n) {
                Some(s) => f.write_str(&s),
                None => f.write_str(&format_number(*n)),
            },
            Scalar::Text(s) => f.write_str(s),
            Scalar::Bool(true) => f.write_str("TRUE"),
            Scalar::Bool(false) => f.write_str("FALSE"),
            Scalar::Error(e) => write!(f, "{e}"),
        }
    }
}

/// Renders a number with at most 15 significant digits.
pub fn format_number(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{n:.14e}").parse().unwrap_or(n);
    let mag = rounded.abs();
    if (1e-9..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        let s = format!("{rounded:e}");
        // Rust prints `1.5e20`; spreadsheets print `1.5E+20`.
        match s.split_once('e') {
            Some((m, e)) if e.starts_with('-') => format!("{m}E{e}"),
            Some((m, e)) => format!("{m}E+{e}"),
            None => s,
        }
    }
}

/// A rectangular, row-major block of scalars. Never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    rows: usize,
    cols: usize,
    cells: Vec<Scalar>,
}

impl Array {
    /// Panics if the dimensions are zero or disagree with the cell count.
    pub fn new(rows: usize, cols: usize, cells: Vec<Scalar>) -> Self {
        assert!(rows >= 1 && cols >= 1, "arrays are never empty");
        assert_eq!(rows * cols, cells.len(), "array is not rectangular");
        Array { rows, cols, cells }
    }

    pub fn filled(rows: usize, cols: usize, value: Scalar) -> Self {
        Array::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(f(r, c));
            }
        }
        Array::new(rows, cols, cells)
    }

    /// Builds from nested rows; `None` when ragged or empty.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Option<Self> {
        let cols = rows.first()?.len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n = rows.len();
        Some(Array::new(n, cols, rows.into_iter().flatten().collect()))
    }

    pub fn column(values: impl IntoIterator<Item = Scalar>) -> Self {
        let cells: Vec<Scalar> = values.into_iter().collect();
        Array::new(cells.len(), 1, cells)
    }

    pub fn row(values: impl IntoIterator<Item = Scalar>) -> Self {
        let cells: Vec<Scalar> = values.into_iter().collect();
        Array::new(1, cells.len(), cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.cells[r * self.cols + c]
    }

    pub fn cells(&self) -> &[Scalar] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Scalar> {
        self.cells
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.cells.iter()
    }

    pub fn row_slice(&self, r: usize) -> Array {
        Array::new(1, self.cols, self.cells[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn col_slice(&self, c: usize) -> Array {
        Array::column((0..self.rows).map(|r| self.get(r, c).clone()))
    }

    pub fn transpose(&self) -> Array {
        Array::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn is_vector(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    /// Element at `(r, c)` of this array stretched to a broadcast shape.
    /// Unit axes stretch; indices past a non-unit extent read as `#N/A`.
    pub fn broadcast_get(&self, r: usize, c: usize) -> Scalar {
        let rr = if self.rows == 1 { 0 } else { r };
        let cc = if self.cols == 1 { 0 } else { c };
        if rr < self.rows && cc < self.cols {
            self.get(rr, cc).clone()
        } else {
            Scalar::error(ErrorKind::NA)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Array(Arc<Array>),
    Lambda(Arc<Closure>),
    /// An unresolved grid reference; consumers dereference on demand.
    Ref(Reference),
    /// Placeholder for an argument the caller left out.
    Omitted,
}

impl Value {
    pub fn error(kind: ErrorKind) -> Self {
        Value::Scalar(Scalar::error(kind))
    }

    pub fn err_detail(kind: ErrorKind, detail: impl Into<String>) -> Self {
        Value::Scalar(Scalar::Error(XlError::with_detail(kind, detail)))
    }

    pub fn number(n: f64) -> Self {
        Value::Scalar(Scalar::number(n))
    }

    pub fn array(a: Array) -> Self {
        Value::Array(Arc::new(a))
    }

    pub fn as_error(&self) -> Option<&XlError> {
        match self {
            Value::Scalar(Scalar::Error(e)) => Some(e),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Array(_) => "array",
            Value::Lambda(_) => "lambda",
            Value::Ref(_) => "reference",
            Value::Omitted => "omitted",
        }
    }
}

impl From<Scalar> for Value {
    fn from(s: Scalar) -> Self {
        Value::Scalar(s)
    }
}

impl From<Array> for Value {
    fn from(a: Array) -> Self {
        Value::array(a)
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::number(n)
    }
}

impl From<XlError> for Value {
    fn from(e: XlError) -> Self {
        Value::Scalar(Scalar::Error(e))
    }
}

impl From<ErrorKind> for Value {
    fn from(k: ErrorKind) -> Self {
        Value::error(k)
    }
}

/// Arithmetic coercion: booleans to 0/1, empty to 0, numeric text parsed.
pub fn coerce_to_number(s: &Scalar) -> Result<f64, XlError> {
    match s {
        Scalar::Number(n) | Scalar::Date(n) => Ok(*n),
        Scalar::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
        Scalar::Empty => Ok(0.0),
        Scalar::Text(t) => parse_numeric_text(t)
            .ok_or_else(|| XlError::with_detail(ErrorKind::Value, format!("not a number: {t:?}"))),
        Scalar::Error(e) => Err(e.clone()),
    }
}

/// Decimal text such as `2.5`, `-1e3` or `50%`. Rejects `inf`/`nan` spellings.
pub fn parse_numeric_text(t: &str) -> Option<f64> {
    let t = t.trim();
    let (body, percent) = match t.strip_suffix('%') {
        Some(b) => (b.trim_end(), true),
        None => (t, false),
    };
    let ok = !body.is_empty()
        && body
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && body.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return None;
    }
    body.parse::<f64>()
        .ok()
        .map(|n| if percent { n / 100.0 } else { n })
        .filter(|n| n.is_finite())
}

pub fn coerce_to_bool(s: &Scalar) -> Result<bool, XlError> {
    match s {
        Scalar::Bool(b) => Ok(*b),
        Scalar::Number(n) | Scalar::Date(n) => Ok(*n != 0.0),
        Scalar::Empty => Ok(false),
        Scalar::Text(t) if t.eq_ignore_ascii_case("TRUE") => Ok(true),
        Scalar::Text(t) if t.eq_ignore_ascii_case("FALSE") => Ok(false),
        Scalar::Text(_) => Err(XlError::new(ErrorKind::Value)),
        Scalar::Error(e) => Err(e.clone()),
    }
}

/// Text coercion used by `&`.
pub fn coerce_to_text(s: &Scalar) -> Result<String, XlError> {
    match s {
        Scalar::Error(e) => Err(e.clone()),
        // Concatenation shows the underlying serial, not a formatted date.
        Scalar::Date(n) => Ok(format_number(*n)),
        other => Ok(other.to_string()),
    }
}

/// Spreadsheet ordering: numbers < text < booleans; text case-insensitive;
/// an empty cell compares as 0 against numbers and as "" against text.
pub fn compare_scalars(a: &Scalar, b: &Scalar) -> Result<Ordering, XlError> {
    fn rank(s: &Scalar) -> u8 {
        match s {
            Scalar::Number(_) | Scalar::Date(_) => 0,
            Scalar::Text(_) => 1,
            Scalar::Bool(_) => 2,
            Scalar::Empty => 3,
            Scalar::Error(_) => 4,
        }
    }
    if let Scalar::Error(e) = a {
        return Err(e.clone());
    }
    if let Scalar::Error(e) = b {
        return Err(e.clone());
    }
    let (a, b) = match (a, b) {
        (Scalar::Empty, Scalar::Empty) => return Ok(Ordering::Equal),
        (Scalar::Empty, other) => (empty_like(other), other.clone()),
        (other, Scalar::Empty) => (other.clone(), empty_like(other)),
        (a, b) => (a.clone(), b.clone()),
    };
    Ok(match (&a, &b) {
        (x, y) if x.is_numeric() && y.is_numeric() => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal)
        }
        (Scalar::Text(x), Scalar::Text(y)) => cmp_text_ci(x, y),
        (Scalar::Bool(x), Scalar::Bool(y)) => x.cmp(y),
        (x, y) => rank(x).cmp(&rank(y)),
    })
}

fn empty_like(other: &Scalar) -> Scalar {
    match other {
        Scalar::Text(_) => Scalar::text(""),
        Scalar::Bool(_) => Scalar::Bool(false),
        _ => Scalar::Number(0.0),
    }
}

pub fn cmp_text_ci(a: &str, b: &str) -> Ordering {
    a.chars()
        .flat_map(char::to_lowercase)
        .cmp(b.chars().flat_map(char::to_lowercase))
}

pub type Shape = (usize, usize);

/// Common shape of two operands. Equal extents are kept, a unit extent
/// stretches, and otherwise the larger extent wins (the excess reads `#N/A`).
pub fn broadcast_shape(a: Shape, b: Shape) -> Shape {
    fn axis(x: usize, y: usize) -> usize {
        if x == 1 {
            y
        } else if y == 1 {
            x
        } else {
            x.max(y)
        }
    }
    (axis(a.0, b.0), axis(a.1, b.1))
}

/// A broadcastable operand: either a single scalar or an array.
#[derive(Clone, Debug)]
pub enum Operand {
    Scalar(Scalar),
    Array(Arc<Array>),
}

impl Operand {
    pub fn shape(&self) -> Shape {
        match self {
            Operand::Scalar(_) => (1, 1),
            Operand::Array(a) => a.shape(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        match self {
            Operand::Scalar(s) => s.clone(),
            Operand::Array(a) => a.broadcast_get(r, c),
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Operand::Scalar(_))
    }
}

/// Applies `op` cell by cell over broadcast operands without any error
/// handling of its own; `op` sees error cells and decides.
pub fn lift_with(args: &[Operand], mut op: impl FnMut(&[Scalar]) -> Scalar) -> Value {
    if args.iter().all(Operand::is_scalar) {
        let cells: Vec<Scalar> = args.iter().map(|a| a.get(0, 0)).collect();
        return Value::Scalar(op(&cells));
    }
    let shape = args
        .iter()
        .map(Operand::shape)
        .reduce(broadcast_shape)
        .unwrap_or((1, 1));
    let mut buf = Vec::with_capacity(args.len());
    let out = Array::from_fn(shape.0, shape.1, |r, c| {
        buf.clear();
        buf.extend(args.iter().map(|a| a.get(r, c)));
        op(&buf)
    });
    Value::array(out)
}

/// Elementwise lifting with error propagation: the first error cell among
/// the inputs (left to right) becomes the output cell unchanged.
pub fn lift_elementwise(args: &[Operand], mut op: impl FnMut(&[Scalar]) -> Scalar) -> Value {
    lift_with(args, |cells| {
        if let Some(e) = cells.iter().find(|s| s.is_error()) {
            return e.clone();
        }
        op(cells)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Operand {
        Operand::Array(Arc::new(Array::column(v.iter().map(|&n| Scalar::Number(n)))))
    }

    #[test]
    fn coercions() {
        assert_eq!(coerce_to_number(&Scalar::Bool(true)), Ok(1.0));
        assert_eq!(coerce_to_number(&Scalar::text("2.5")), Ok(2.5));
        assert_eq!(
            coerce_to_number(&Scalar::text("abc")).unwrap_err().kind,
            ErrorKind::Value
        );
        assert_eq!(coerce_to_number(&Scalar::Empty), Ok(0.0));
        assert!(parse_numeric_text("inf").is_none());
        assert!(parse_numeric_text("NaN").is_none());
        assert_eq!(parse_numeric_text("50%"), Some(0.5));
    }

    #[test]
    fn decimal_text_matches_std_parse() {
        for s in ["2.5", "0.1", "-3", "1e-3", "12345.678"] {
            assert_eq!(parse_numeric_text(s), s.parse::<f64>().ok());
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(broadcast_shape((2, 1), (1, 8)), (2, 8));
        assert_eq!(broadcast_shape((3, 3), (1, 1)), (3, 3));
        assert_eq!(broadcast_shape((2, 3), (3, 3)), (3, 3));
    }

    #[test]
    fn mismatched_rows_fill_na() {
        // 2x3 against 3x3: row 3 of the first operand is out of range.
        let a = Operand::Array(Arc::new(Array::filled(2, 3, Scalar::Number(1.0))));
        let b = Operand::Array(Arc::new(Array::filled(3, 3, Scalar::Number(2.0))));
        let Value::Array(out) = lift_elementwise(&[a, b], |c| {
            Scalar::number(c[0].as_f64().unwrap() + c[1].as_f64().unwrap())
        }) else {
            panic!("expected array")
        };
        assert_eq!(out.shape(), (3, 3));
        for c in 0..3 {
            assert_eq!(out.get(0, c), &Scalar::Number(3.0));
            assert_eq!(out.get(2, c), &Scalar::error(ErrorKind::NA));
        }
    }

    #[test]
    fn lifted_mod_over_column() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let out = lift_elementwise(&[col(&xs), Operand::Scalar(Scalar::Number(3.0))], |c| {
            let (a, b) = (c[0].as_f64().unwrap(), c[1].as_f64().unwrap());
            Scalar::number(a - b * (a / b).floor())
        });
        let expected: Vec<Scalar> = xs.iter().map(|x| Scalar::Number(x % 3.0)).collect();
        assert_eq!(out, Value::array(Array::column(expected)));
    }

    #[test]
    fn errors_propagate_through_lift() {
        let a = Operand::Array(Arc::new(Array::column([
            Scalar::Number(1.0),
            Scalar::error(ErrorKind::Ref),
        ])));
        let out = lift_elementwise(&[a, Operand::Scalar(Scalar::Number(2.0))], |c| {
            Scalar::number(c[0].as_f64().unwrap() * c[1].as_f64().unwrap())
        });
        assert_eq!(
            out,
            Value::array(Array::column([Scalar::Number(2.0), Scalar::error(ErrorKind::Ref)]))
        );
    }

    #[test]
    fn number_display() {
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(17958.563), "17958.563");
        assert_eq!(format_number(-30000.0), "-30000");
        assert_eq!(format_number(1.5e20), "1.5E+20");
        assert_eq!(format_number(2.5e-12), "2.5E-12");
    }

    #[test]
    fn text_compares_case_insensitively() {
        let r = compare_scalars(&Scalar::text("abc"), &Scalar::text("ABC")).unwrap();
        assert_eq!(r, Ordering::Equal);
        let r = compare_scalars(&Scalar::Empty, &Scalar::text("")).unwrap();
        assert_eq!(r, Ordering::Equal);
        let r = compare_scalars(&Scalar::Number(5.0), &Scalar::text("a")).unwrap();
        assert_eq!(r, Ordering::Less);
    }

    #[test]
    fn error_strings() {
        let rendered: Vec<&str> = ErrorKind::ALL.iter().map(|k| k.as_str()).collect();
        assert_eq!(
            rendered,
            ["#DIV/0!", "#VALUE!", "#REF!", "#NAME?", "#NUM!", "#N/A", "#CALC!", "#SPILL!", "#CIRC!"]
        );
        for k in ErrorKind::ALL {
            assert_eq!(ErrorKind::parse(k.as_str()), Some(k));
        }
    }

    proptest::proptest! {
        #[test]
        fn broadcast_commutes(a in (1usize..6, 1usize..6), b in (1usize..6, 1usize..6)) {
            proptest::prop_assert_eq!(broadcast_shape(a, b), broadcast_shape(b, a));
        }

        #[test]
        fn lift_preserves_shape_and_errors(
            a in (1usize..5, 1usize..5), b in (1usize..5, 1usize..5), err_at in 0usize..25
        ) {
            let mut cells = vec![Scalar::Number(1.0); a.0 * a.1];
            let idx = err_at % cells.len();
            cells[idx] = Scalar::error(ErrorKind::Div0);
            let x = Operand::Array(Arc::new(Array::new(a.0, a.1, cells)));
            let y = Operand::Array(Arc::new(Array::filled(b.0, b.1, Scalar::Number(2.0))));
            let out = lift_elementwise(&[x.clone(), y], |c| {
                Scalar::number(c[0].as_f64().unwrap() + c[1].as_f64().unwrap())
            });
            let shape = broadcast_shape(a, b);
            let Value::Array(out) = out else { panic!() };
            proptest::prop_assert_eq!(out.shape(), shape);
            for r in 0..shape.0 {
                for c in 0..shape.1 {
                    let input = x.get(r, c);
                    if input.is_error() {
                        proptest::prop_assert_eq!(out.get(r, c), &input);
                    }
                }
            }
        }
    }
}
