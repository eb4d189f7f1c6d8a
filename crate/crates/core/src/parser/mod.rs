//! Formula text to [`Expr`] and back.

mod ast;
mod lexer;
mod printer;

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

pub use ast::{
    BinOp, CellCoord, CellRef, Expr, Literal, Param, RangeRef, UnaryOp, MAX_COLS, MAX_ROWS,
};
pub use lexer::{
    column_letters, is_plain_identifier, parse_a1, tokenize, LexError, Op, Punct, Token,
    TokenKind,
};
pub use printer::{print_expr, print_formula};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("at offset {offset}: {message}")]
    Invalid { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lex(e) => e.offset(),
            ParseError::Unexpected { offset, .. } | ParseError::Invalid { offset, .. } => *offset,
        }
    }
}

/// Parses formula text, with or without the leading `=`.
pub fn parse_formula(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let end = source.chars().count();
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    if matches!(p.peek_kind(), Some(TokenKind::Op(Op::Eq))) {
        p.pos += 1;
    }
    let expr = p.expression()?;
    if p.pos < p.tokens.len() {
        return Err(p.unexpected(&["operator", "end of formula"]));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.span.start)
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::Unexpected {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map_or_else(|| "end of formula".to_string(), |t| format!("{:?}", t.lexeme)),
        }
    }

    fn invalid(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            offset,
            message: message.into(),
        }
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.peek_kind() == Some(&TokenKind::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct, what: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn binary_op(&self) -> Option<BinOp> {
        match self.peek_kind()? {
            TokenKind::Op(op) => Some(match op {
                Op::Plus => BinOp::Add,
                Op::Minus => BinOp::Sub,
                Op::Star => BinOp::Mul,
                Op::Slash => BinOp::Div,
                Op::Caret => BinOp::Pow,
                Op::Amp => BinOp::Concat,
                Op::Eq => BinOp::Eq,
                Op::Ne => BinOp::Ne,
                Op::Lt => BinOp::Lt,
                Op::Le => BinOp::Le,
                Op::Gt => BinOp::Gt,
                Op::Ge => BinOp::Ge,
                Op::Percent | Op::Colon => return None,
            }),
            _ => None,
        }
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    /// Precedence climbing over the left-associative binary levels 1..=5.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        if min_prec > BinOp::Pow.precedence() {
            return self.unary();
        }
        let mut lhs = self.binary(min_prec + 1)?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() == min_prec) {
            self.pos += 1;
            let rhs = self.binary(min_prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek_kind() {
            Some(TokenKind::Op(Op::Minus)) => UnaryOp::Neg,
            Some(TokenKind::Op(Op::Plus)) => UnaryOp::Plus,
            _ => return self.percent(),
        };
        self.pos += 1;
        let operand = self.unary()?;
        Ok(Expr::Unary {
            op,
            operand: Box::new(operand),
        })
    }

    fn percent(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.postfix()?;
        while self.peek_kind() == Some(&TokenKind::Op(Op::Percent)) {
            self.pos += 1;
            e = Expr::Percent(Box::new(e));
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Punct(Punct::LParen)) => {
                    let open = self.offset();
                    self.pos += 1;
                    let args = self.arguments()?;
                    e = self.make_call(e, args, open)?;
                }
                Some(TokenKind::SpillSuffix) => {
                    if !matches!(e, Expr::Cell(_) | Expr::Name(_)) {
                        return Err(self.invalid(self.offset(), "`#` must follow a cell or a name"));
                    }
                    self.pos += 1;
                    e = Expr::Spill(Box::new(e));
                }
                _ => return Ok(e),
            }
        }
    }

    /// Arguments after `(` through the matching `)`. Empty slots become
    /// `Expr::Omitted`; `f()` has no arguments.
    fn arguments(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        if self.eat_punct(Punct::RParen) {
            return Ok(args);
        }
        loop {
            match self.peek_kind() {
                Some(TokenKind::Punct(Punct::Comma | Punct::RParen)) => {
                    args.push(Arg::Expr(Expr::Omitted))
                }
                _ => args.push(self.argument()?),
            }
            if self.eat_punct(Punct::Comma) {
                continue;
            }
            self.expect_punct(Punct::RParen, "`,` or `)`")?;
            return Ok(args);
        }
    }

    /// `[name]` is accepted here and rejected later outside LAMBDA.
    fn argument(&mut self) -> Result<Arg, ParseError> {
        if self.peek_kind() == Some(&TokenKind::Punct(Punct::LBracket)) {
            let offset = self.offset();
            self.pos += 1;
            let name = match self.peek_kind() {
                Some(TokenKind::Ident(n)) => n.clone(),
                _ => return Err(self.unexpected(&["parameter name"])),
            };
            self.pos += 1;
            self.expect_punct(Punct::RBracket, "`]`")?;
            return Ok(Arg::Optional { name, offset });
        }
        self.expression().map(Arg::Expr)
    }

    fn make_call(&self, callee: Expr, args: Vec<Arg>, open: usize) -> Result<Expr, ParseError> {
        let keyword = match &callee {
            Expr::Name(n) if n.eq_ignore_ascii_case("LET") => Some(Keyword::Let),
            Expr::Name(n) if n.eq_ignore_ascii_case("LAMBDA") => Some(Keyword::Lambda),
            _ => None,
        };
        match keyword {
            Some(Keyword::Lambda) => self.make_lambda(args, open),
            Some(Keyword::Let) => self.make_let(self.plain_args(args)?, open),
            None => Ok(Expr::Call {
                callee: Box::new(callee),
                args: self.plain_args(args)?,
            }),
        }
    }

    fn plain_args(&self, args: Vec<Arg>) -> Result<Vec<Expr>, ParseError> {
        args.into_iter()
            .map(|a| match a {
                Arg::Expr(e) => Ok(e),
                Arg::Optional { offset, .. } => Err(self.invalid(
                    offset,
                    "`[name]` is only allowed in LAMBDA parameters",
                )),
            })
            .collect()
    }

    fn make_let(&self, mut args: Vec<Expr>, open: usize) -> Result<Expr, ParseError> {
        if args.len() < 3 || args.len().is_multiple_of(2) {
            return Err(self.invalid(
                open,
                format!(
                    "LET takes name/value pairs and one body (an odd count of at least 3), got {}",
                    args.len()
                ),
            ));
        }
        let body = args.pop().expect("checked length");
        let mut bindings = Vec::with_capacity(args.len() / 2);
        let mut it = args.into_iter();
        while let (Some(name), Some(value)) = (it.next(), it.next()) {
            let Expr::Name(name) = name else {
                return Err(self.invalid(open, "LET names must be plain identifiers"));
            };
            bindings.push((name, Arc::new(value)));
        }
        Ok(Expr::Let {
            bindings,
            body: Box::new(body),
        })
    }

    fn make_lambda(&self, mut args: Vec<Arg>, open: usize) -> Result<Expr, ParseError> {
        let body = match args.pop() {
            Some(Arg::Expr(e)) if !matches!(e, Expr::Omitted) => e,
            _ => return Err(self.invalid(open, "LAMBDA needs a body")),
        };
        let mut params: Vec<Param> = Vec::with_capacity(args.len());
        let mut seen = HashSet::new();
        for a in args {
            let param = match a {
                Arg::Expr(Expr::Name(name)) => Param {
                    name,
                    optional: false,
                },
                Arg::Optional { name, .. } => Param {
                    name,
                    optional: true,
                },
                Arg::Expr(_) => {
                    return Err(self.invalid(open, "LAMBDA parameters must be plain identifiers"))
                }
            };
            if !param.optional && params.last().is_some_and(|p| p.optional) {
                return Err(self.invalid(open, "optional parameters must follow required ones"));
            }
            if !seen.insert(param.name.to_uppercase()) {
                return Err(self.invalid(
                    open,
                    format!("duplicate LAMBDA parameter {:?}", param.name),
                ));
            }
            params.push(param);
        }
        Ok(Expr::Lambda {
            params,
            body: Arc::new(body),
        })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected(&["expression"]));
        };
        match tok.kind {
            TokenKind::Number(n) => {
                self.pos += 1;
                if !n.is_finite() {
                    return Err(self.invalid(tok.span.start, "number out of range"));
                }
                Ok(Expr::Number(n))
            }
            TokenKind::Text(s) => {
                self.pos += 1;
                Ok(Expr::Text(s))
            }
            TokenKind::Bool(b) => {
                self.pos += 1;
                Ok(Expr::Bool(b))
            }
            TokenKind::Error(k) => {
                self.pos += 1;
                Ok(Expr::Error(k))
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                Ok(Expr::Name(name))
            }
            TokenKind::CellRef { sheet, coord } => {
                self.pos += 1;
                if self.peek_kind() == Some(&TokenKind::Op(Op::Colon)) {
                    self.pos += 1;
                    match self.peek_kind().cloned() {
                        Some(TokenKind::CellRef {
                            sheet: second_sheet,
                            coord: end,
                        }) => {
                            if second_sheet.is_some() && second_sheet != sheet {
                                return Err(self.invalid(
                                    self.offset(),
                                    "both corners of a range must be on the same sheet",
                                ));
                            }
                            self.pos += 1;
                            Ok(Expr::Range(RangeRef::normalized(sheet, coord, end)))
                        }
                        _ => Err(self.unexpected(&["cell reference"])),
                    }
                } else {
                    Ok(Expr::Cell(CellRef { sheet, coord }))
                }
            }
            TokenKind::Punct(Punct::LParen) => {
                self.pos += 1;
                let e = self.expression()?;
                self.expect_punct(Punct::RParen, "`)`")?;
                Ok(e)
            }
            TokenKind::ArrayOpen => self.array_literal(),
            TokenKind::At => {
                self.pos += 1;
                let inner = self.postfix()?;
                Ok(Expr::Intersect(Box::new(inner)))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    fn array_literal(&mut self) -> Result<Expr, ParseError> {
        let open = self.offset();
        self.pos += 1;
        let mut rows: Vec<Vec<Literal>> = vec![Vec::new()];
        loop {
            let lit = self.array_element()?;
            rows.last_mut().expect("nonempty").push(lit);
            match self.peek_kind() {
                Some(TokenKind::Punct(Punct::Comma)) => self.pos += 1,
                Some(TokenKind::Punct(Punct::Semicolon)) => {
                    self.pos += 1;
                    rows.push(Vec::new());
                }
                Some(TokenKind::ArrayClose) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.unexpected(&["`,`", "`;`", "`}`"])),
            }
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(self.invalid(open, "array literal rows must have equal length"));
        }
        Ok(Expr::Array(rows))
    }

    fn array_element(&mut self) -> Result<Literal, ParseError> {
        let negative = match self.peek_kind() {
            Some(TokenKind::Op(Op::Minus)) => {
                self.pos += 1;
                true
            }
            Some(TokenKind::Op(Op::Plus)) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected(&["array element"]));
        };
        let lit = match tok.kind {
            TokenKind::Number(n) if n.is_finite() => {
                let mut n = if negative { -n } else { n };
                self.pos += 1;
                while self.peek_kind() == Some(&TokenKind::Op(Op::Percent)) {
                    self.pos += 1;
                    n /= 100.0;
                }
                return Ok(Literal::Number(n));
            }
            _ if negative => return Err(self.unexpected(&["number"])),
            TokenKind::Text(s) => Literal::Text(s),
            TokenKind::Bool(b) => Literal::Bool(b),
            TokenKind::Error(k) => Literal::Error(k),
            _ => return Err(self.unexpected(&["number", "text", "boolean", "error"])),
        };
        self.pos += 1;
        Ok(lit)
    }
}

enum Keyword {
    Let,
    Lambda,
}

enum Arg {
    Expr(Expr),
    Optional { name: String, offset: usize },
}
