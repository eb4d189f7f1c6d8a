use std::ops::Range;

use thiserror::Error;

use super::ast::{CellCoord, MAX_COLS, MAX_ROWS};
use crate::values::ErrorKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting at offset {offset}")]
    UnterminatedString { offset: usize },
    #[error("illegal character {ch:?} at offset {offset}")]
    IllegalChar { ch: char, offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match self {
            LexError::UnterminatedString { offset } | LexError::IllegalChar { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Percent,
    Colon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    Comma,
    Semicolon,
    LBracket,
    RBracket,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(ErrorKind),
    Ident(String),
    CellRef {
        sheet: Option<String>,
        coord: CellCoord,
    },
    Op(Op),
    Punct(Punct),
    ArrayOpen,
    ArrayClose,
    /// `#` directly after a reference or name.
    SpillSuffix,
    At,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Character offsets into the source.
    pub span: Range<usize>,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '\\'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

/// Parses `A1`, `$A$1`, `xfd1048576`; `None` when not A1-shaped or out of grid.
pub fn parse_a1(s: &str) -> Option<CellCoord> {
    let b = s.as_bytes();
    let mut i = 0;
    let col_abs = b.first() == Some(&b'$');
    if col_abs {
        i += 1;
    }
    let letters_start = i;
    while i < b.len() && b[i].is_ascii_alphabetic() {
        i += 1;
    }
    let letters = &s[letters_start..i];
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    let row_abs = b.get(i) == Some(&b'$');
    if row_abs {
        i += 1;
    }
    let digits = &s[i..];
    if digits.is_empty() || !digits.bytes().all(|d| d.is_ascii_digit()) || digits.starts_with('0')
    {
        return None;
    }
    let col = letters
        .bytes()
        .fold(0u32, |acc, l| acc * 26 + u32::from(l.to_ascii_uppercase() - b'A' + 1));
    let row: u32 = digits.parse().ok()?;
    if col > MAX_COLS || row > MAX_ROWS {
        return None;
    }
    Some(CellCoord {
        col,
        row,
        col_abs,
        row_abs,
    })
}

pub fn column_letters(mut col: u32) -> String {
    let mut out = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'A' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// True when `s` would lex as a single plain identifier (not a reference,
/// boolean or keyword-shaped literal).
pub fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    if !chars.all(is_ident_continue) {
        return false;
    }
    parse_a1(s).is_none() && !s.eq_ignore_ascii_case("TRUE") && !s.eq_ignore_ascii_case("FALSE")
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    tokens: Vec<Token>,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        tokens: Vec::new(),
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl Lexer {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        let lexeme: String = self.chars[start..self.pos].iter().collect();
        self.tokens.push(Token {
            kind,
            lexeme,
            span: start..self.pos,
        });
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.number(start);
                continue;
            }
            if c == '"' {
                self.string(start)?;
                continue;
            }
            if c == '\'' {
                self.quoted_sheet(start)?;
                continue;
            }
            if c == '#' {
                self.hash(start);
                continue;
            }
            if c == '$' || is_ident_start(c) {
                self.word(start)?;
                continue;
            }
            let (kind, len) = match (c, self.peek(1)) {
                ('<', Some('>')) => (TokenKind::Op(Op::Ne), 2),
                ('<', Some('=')) => (TokenKind::Op(Op::Le), 2),
                ('>', Some('=')) => (TokenKind::Op(Op::Ge), 2),
                ('<', _) => (TokenKind::Op(Op::Lt), 1),
                ('>', _) => (TokenKind::Op(Op::Gt), 1),
                ('=', _) => (TokenKind::Op(Op::Eq), 1),
                ('+', _) => (TokenKind::Op(Op::Plus), 1),
                ('-', _) => (TokenKind::Op(Op::Minus), 1),
                ('*', _) => (TokenKind::Op(Op::Star), 1),
                ('/', _) => (TokenKind::Op(Op::Slash), 1),
                ('^', _) => (TokenKind::Op(Op::Caret), 1),
                ('&', _) => (TokenKind::Op(Op::Amp), 1),
                ('%', _) => (TokenKind::Op(Op::Percent), 1),
                (':', _) => (TokenKind::Op(Op::Colon), 1),
                ('(', _) => (TokenKind::Punct(Punct::LParen), 1),
                (')', _) => (TokenKind::Punct(Punct::RParen), 1),
                (',', _) => (TokenKind::Punct(Punct::Comma), 1),
                (';', _) => (TokenKind::Punct(Punct::Semicolon), 1),
                ('[', _) => (TokenKind::Punct(Punct::LBracket), 1),
                (']', _) => (TokenKind::Punct(Punct::RBracket), 1),
                ('{', _) => (TokenKind::ArrayOpen, 1),
                ('}', _) => (TokenKind::ArrayClose, 1),
                ('@', _) => (TokenKind::At, 1),
                _ => return Err(LexError::IllegalChar { ch: c, offset: start }),
            };
            self.pos += len;
            self.push(kind, start);
        }
        Ok(())
    }

    fn number(&mut self, start: usize) {
        while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek(0) == Some('.') {
            self.pos += 1;
            while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = usize::from(matches!(self.peek(1), Some('+' | '-')));
            if self.peek(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1 + sign;
                while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value = text.parse::<f64>().unwrap_or(f64::INFINITY);
        self.push(TokenKind::Number(value), start);
    }

    fn string(&mut self, start: usize) -> Result<(), LexError> {
        self.pos += 1;
        let mut text = String::new();
        loop {
            match self.peek(0) {
                None => return Err(LexError::UnterminatedString { offset: start }),
                Some('"') if self.peek(1) == Some('"') => {
                    text.push('"');
                    self.pos += 2;
                }
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    text.push(c);
                    self.pos += 1;
                }
            }
        }
        self.push(TokenKind::Text(text), start);
        Ok(())
    }

    fn quoted_sheet(&mut self, start: usize) -> Result<(), LexError> {
        self.pos += 1;
        let mut name = String::new();
        loop {
            match self.peek(0) {
                None => return Err(LexError::UnterminatedString { offset: start }),
                Some('\'') if self.peek(1) == Some('\'') => {
                    name.push('\'');
                    self.pos += 2;
                }
                Some('\'') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    name.push(c);
                    self.pos += 1;
                }
            }
        }
        if self.peek(0) != Some('!') {
            return Err(LexError::IllegalChar {
                ch: '\'',
                offset: start,
            });
        }
        self.pos += 1;
        self.qualified_ref(start, name)
    }

    fn qualified_ref(&mut self, start: usize, sheet: String) -> Result<(), LexError> {
        let ref_start = self.pos;
        while self
            .peek(0)
            .is_some_and(|c| c == '$' || c.is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        let text: String = self.chars[ref_start..self.pos].iter().collect();
        match parse_a1(&text) {
            Some(coord) => {
                self.push(
                    TokenKind::CellRef {
                        sheet: Some(sheet),
                        coord,
                    },
                    start,
                );
                Ok(())
            }
            None => Err(LexError::IllegalChar {
                ch: self.chars.get(ref_start).copied().unwrap_or('!'),
                offset: ref_start,
            }),
        }
    }

    fn hash(&mut self, start: usize) {
        // Error literals are matched longest-first; anything else is a
        // spill suffix.
        let rest: String = self.chars[self.pos..].iter().take(8).collect();
        let mut best: Option<ErrorKind> = None;
        for k in ErrorKind::ALL {
            let s = k.as_str();
            if rest.len() >= s.len()
                && rest.is_char_boundary(s.len())
                && rest[..s.len()].eq_ignore_ascii_case(s)
                && best.is_none_or(|b| b.as_str().len() < s.len())
            {
                best = Some(k);
            }
        }
        let follows_ref = matches!(
            self.tokens.last(),
            Some(Token {
                kind: TokenKind::Ident(_) | TokenKind::CellRef { .. },
                span,
                ..
            }) if span.end == start
        );
        match best {
            Some(kind) if !follows_ref => {
                self.pos += kind.as_str().chars().count();
                self.push(TokenKind::Error(kind), start);
            }
            _ => {
                self.pos += 1;
                self.push(TokenKind::SpillSuffix, start);
            }
        }
    }

    fn word(&mut self, start: usize) -> Result<(), LexError> {
        // `$` only appears in references.
        if self.peek(0) == Some('$') {
            while self
                .peek(0)
                .is_some_and(|c| c == '$' || c.is_ascii_alphanumeric())
            {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            return match parse_a1(&text) {
                Some(coord) => {
                    self.push(TokenKind::CellRef { sheet: None, coord }, start);
                    Ok(())
                }
                None => Err(LexError::IllegalChar {
                    ch: '$',
                    offset: start,
                }),
            };
        }
        while self.peek(0).is_some_and(is_ident_continue) {
            self.pos += 1;
        }
        // `A$1` style: letters followed by `$digits`.
        if self.peek(0) == Some('$') {
            let save = self.pos;
            self.pos += 1;
            while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            if let Some(coord) = parse_a1(&text) {
                self.push(TokenKind::CellRef { sheet: None, coord }, start);
                return Ok(());
            }
            self.pos = save;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if self.peek(0) == Some('!') {
            self.pos += 1;
            return self.qualified_ref(start, text);
        }
        let called = self.peek(0) == Some('(');
        let kind = if called {
            TokenKind::Ident(text)
        } else if text.eq_ignore_ascii_case("TRUE") {
            TokenKind::Bool(true)
        } else if text.eq_ignore_ascii_case("FALSE") {
            TokenKind::Bool(false)
        } else if let Some(coord) = parse_a1(&text) {
            TokenKind::CellRef { sheet: None, coord }
        } else {
            TokenKind::Ident(text)
        };
        self.push(kind, start);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn mod_over_range() {
        let k = kinds("=MOD(A1:A10,3)");
        assert_eq!(k.len(), 9);
        assert_eq!(k[0], TokenKind::Op(Op::Eq));
        assert_eq!(k[1], TokenKind::Ident("MOD".into()));
        assert_eq!(
            k[3],
            TokenKind::CellRef {
                sheet: None,
                coord: CellCoord::new(1, 1)
            }
        );
        assert_eq!(k[4], TokenKind::Op(Op::Colon));
        assert_eq!(k[7], TokenKind::Number(3.0));
    }

    #[test]
    fn greek_identifier() {
        assert_eq!(kinds("δt"), vec![TokenKind::Ident("δt".into())]);
        assert_eq!(kinds("Addλ"), vec![TokenKind::Ident("Addλ".into())]);
        assert!(kinds("").is_empty());
    }

    #[test]
    fn a1_shape_versus_names() {
        assert!(matches!(kinds("X1")[0], TokenKind::CellRef { .. }));
        assert_eq!(kinds("X1_"), vec![TokenKind::Ident("X1_".into())]);
        assert_eq!(kinds("LOG10(")[0], TokenKind::Ident("LOG10".into()));
        assert_eq!(kinds("ABCD1"), vec![TokenKind::Ident("ABCD1".into())]);
        assert!(matches!(kinds("$B$7")[0], TokenKind::CellRef { .. }));
        assert!(matches!(kinds("B$7")[0], TokenKind::CellRef { .. }));
        assert!(matches!(
            &kinds("Sheet2!C3")[0],
            TokenKind::CellRef { sheet: Some(s), .. } if s == "Sheet2"
        ));
        assert!(matches!(
            &kinds("'My Sheet'!C3")[0],
            TokenKind::CellRef { sheet: Some(s), .. } if s == "My Sheet"
        ));
    }

    #[test]
    fn hash_forms() {
        assert_eq!(kinds("#N/A"), vec![TokenKind::Error(ErrorKind::NA)]);
        assert_eq!(kinds("#DIV/0!"), vec![TokenKind::Error(ErrorKind::Div0)]);
        assert_eq!(
            kinds("sales#"),
            vec![TokenKind::Ident("sales".into()), TokenKind::SpillSuffix]
        );
        assert_eq!(kinds("A1#")[1], TokenKind::SpillSuffix);
    }

    #[test]
    fn strings_and_errors() {
        assert_eq!(kinds(r#""a""b""#), vec![TokenKind::Text("a\"b".into())]);
        assert_eq!(
            tokenize("\"abc"),
            Err(LexError::UnterminatedString { offset: 0 })
        );
        assert_eq!(
            tokenize("1 ~ 2"),
            Err(LexError::IllegalChar { ch: '~', offset: 2 })
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(kinds("1.5e-3"), vec![TokenKind::Number(1.5e-3)]);
        assert_eq!(kinds(".5"), vec![TokenKind::Number(0.5)]);
        assert_eq!(
            kinds("5%"),
            vec![TokenKind::Number(5.0), TokenKind::Op(Op::Percent)]
        );
    }

    #[test]
    fn columns_round_trip() {
        for col in [1, 26, 27, 52, 702, 703, 16384] {
            let s = format!("{}1", column_letters(col));
            assert_eq!(parse_a1(&s).unwrap().col, col);
        }
    }

    proptest::proptest! {
        #[test]
        fn spans_tile_the_source(src in "[ a-zA-Z0-9_.+*/^&=<>(),;{}@%:$λδ\"#-]{0,40}") {
            if let Ok(tokens) = tokenize(&src) {
                let chars: Vec<char> = src.chars().collect();
                let mut pos = 0;
                for t in &tokens {
                    proptest::prop_assert!(t.span.start >= pos);
                    proptest::prop_assert!(chars[pos..t.span.start].iter().all(|c| c.is_whitespace()));
                    let lexeme: String = chars[t.span.clone()].iter().collect();
                    proptest::prop_assert_eq!(&lexeme, &t.lexeme);
                    pos = t.span.end;
                }
                proptest::prop_assert!(chars[pos..].iter().all(|c| c.is_whitespace()));
            }
        }
    }
}
