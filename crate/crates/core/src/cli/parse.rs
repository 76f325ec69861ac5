//! Problem files.
//!
//! ```text
//! n = 1; u_t = u_xx + u*u_x; ref u = 1/2; jet_degree = 2; base_degree = 0
//! ```
//!
//! Expressions use `+ - * / ^`, parentheses and rational literals. `x` and the
//! `u_x`, `u_xx` aliases exist only for `n = 1`; otherwise coordinates are
//! `x1..xn` and jets are written with digit indices such as `u_12`. There is
//! no implicit multiplication.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Rational, Symbol};
use crate::parabolic::{EvolutionEquation, ParabolicError};

/// Largest spatial dimension expressible with single-digit indices.
pub const MAX_DIM: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("{line}:{column}: index {index} is outside 1..={n}")]
    IndexOutOfRange {
        line: usize,
        column: usize,
        index: u32,
        n: usize,
    },
    #[error("{line}:{column}: time derivative {token} on the right-hand side")]
    TimeDerivativeOnRhs { line: usize, column: usize, token: String },
    #[error("{line}:{column}: {source}")]
    Expr {
        line: usize,
        column: usize,
        source: ExprError,
    },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::IndexOutOfRange { line, column, .. }
            | ParseError::TimeDerivativeOnRhs { line, column, .. }
            | ParseError::Expr { line, column, .. } => (*line, *column),
        }
    }

    pub fn expected(&self) -> &[String] {
        match self {
            ParseError::Syntax { expected, .. } => expected,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Eq => f.write_str("'='"),
            Tok::Semi => f.write_str("';'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            column += i - start;
            Tok::Int(text.parse().expect("digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            column += i - start;
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            let t = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '=' => Tok::Eq,
                ';' => Tok::Semi,
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        column,
                        message: format!("unexpected character '{c}'"),
                        expected: Vec::new(),
                    })
                }
            };
            i += 1;
            column += 1;
            t
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// A parsed problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub n: usize,
    pub rhs: Expr,
    pub reference: BTreeMap<Symbol, Rational>,
    pub jet_degree: Option<u32>,
    pub base_degree: Option<u32>,
    pub order: Option<u32>,
}

impl ProblemFile {
    pub fn new(n: usize, rhs: Expr) -> Self {
        ProblemFile {
            n,
            rhs,
            reference: BTreeMap::new(),
            jet_degree: None,
            base_degree: None,
            order: None,
        }
    }

    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut p = Parser::new(src, 0)?;
        p.file()
    }

    /// Source text that parses back to `self`.
    pub fn print(&self) -> String {
        let one_dim = self.n == 1;
        let mut s = format!("n = {}; u_t = {}", self.n, self.rhs.render(one_dim));
        for (sym, v) in &self.reference {
            s.push_str(&format!("; ref {} = {v}", sym.name(one_dim)));
        }
        for (key, v) in [
            ("jet_degree", self.jet_degree),
            ("base_degree", self.base_degree),
            ("order", self.order),
        ] {
            if let Some(v) = v {
                s.push_str(&format!("; {key} = {v}"));
            }
        }
        s.push('\n');
        s
    }

    pub fn equation(&self) -> Result<EvolutionEquation, ParabolicError> {
        EvolutionEquation::with_reference(self.n, self.rhs.clone(), self.reference.clone())
    }

    /// The right-hand side in source syntax.
    pub fn rhs_source(&self) -> String {
        self.rhs.render(self.n == 1)
    }
}

/// Parses a standalone expression in `n` spatial dimensions, such as a
/// density or a flux component.
pub fn parse_expr(src: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, n)?;
    let e = p.expr()?;
    p.expect(Tok::Eof, &["operator", "end of input"])?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn new(src: &str, n: usize) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            n,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &[&str]) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.error_at(self.peek(), expected))
        }
    }

    fn keyword(&mut self, word: &str) -> Result<Token, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == word => Ok(self.bump()),
            _ => Err(self.error_at(self.peek(), &[&format!("'{word}'")])),
        }
    }

    fn int(&mut self) -> Result<(BigInt, Token), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Int(i) => Ok((i.clone(), t)),
            _ => Err(self.error_at(&t, &["integer"])),
        }
    }

    fn small_int(&mut self) -> Result<u32, ParseError> {
        let (i, t) = self.int()?;
        i.to_u32().ok_or_else(|| ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("integer {i} is too large"),
            expected: Vec::new(),
        })
    }

    fn file(&mut self) -> Result<ProblemFile, ParseError> {
        self.keyword("n")?;
        self.expect(Tok::Eq, &["'='"])?;
        let (n, t) = self.int()?;
        match n.to_usize() {
            Some(n) if (1..=MAX_DIM).contains(&n) => self.n = n,
            _ => {
                return Err(ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("dimension {n} is outside 1..={MAX_DIM}"),
                    expected: Vec::new(),
                })
            }
        }
        self.expect(Tok::Semi, &["';'"])?;
        self.keyword("u_t")?;
        self.expect(Tok::Eq, &["'='"])?;
        let mut file = ProblemFile::new(self.n, self.expr()?);
        loop {
            match self.peek().tok {
                Tok::Eof => break,
                Tok::Semi => {
                    self.bump();
                    if self.peek().tok == Tok::Eof {
                        break;
                    }
                    self.option(&mut file)?;
                }
                _ => return Err(self.error_at(self.peek(), &["operator", "';'", "end of input"])),
            }
        }
        Ok(file)
    }

    fn option(&mut self, file: &mut ProblemFile) -> Result<(), ParseError> {
        const OPTIONS: [&str; 4] = ["'ref'", "'jet_degree'", "'base_degree'", "'order'"];
        let t = self.bump();
        let Tok::Ident(word) = &t.tok else {
            return Err(self.error_at(&t, &OPTIONS));
        };
        let duplicate = |what: &str| ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("{what} given twice"),
            expected: Vec::new(),
        };
        match word.as_str() {
            "ref" => {
                let st = self.peek().clone();
                let sym = match self.bump().tok {
                    Tok::Ident(name) => self.ident(&name, &st)?,
                    _ => return Err(self.error_at(&st, &["identifier"])),
                };
                self.expect(Tok::Eq, &["'='"])?;
                let v = self.signed_rational()?;
                if file.reference.insert(sym.clone(), v).is_some() {
                    return Err(duplicate(&format!("ref {}", sym.name(self.n == 1))));
                }
            }
            "jet_degree" | "base_degree" | "order" => {
                self.expect(Tok::Eq, &["'='"])?;
                let v = self.small_int()?;
                let slot = match word.as_str() {
                    "jet_degree" => &mut file.jet_degree,
                    "base_degree" => &mut file.base_degree,
                    _ => &mut file.order,
                };
                if slot.replace(v).is_some() {
                    return Err(duplicate(word));
                }
            }
            _ => return Err(self.error_at(&t, &OPTIONS)),
        }
        Ok(())
    }

    fn signed_rational(&mut self) -> Result<Rational, ParseError> {
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (p, _) = self.int()?;
        let mut q = BigInt::from(1);
        if self.peek().tok == Tok::Slash {
            self.bump();
            let (d, t) = self.int()?;
            if d.is_zero() {
                return Err(ParseError::Expr {
                    line: t.line,
                    column: t.column,
                    source: ExprError::DivisionByZero,
                });
            }
            q = d;
        }
        let v = Rational::new(p, q);
        Ok(if negative { -v } else { v })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    let t = self.bump();
                    let d = self.unary()?;
                    acc = acc.try_div(&d).map_err(|source| ParseError::Expr {
                        line: t.line,
                        column: t.column,
                        source,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-&self.factor()?);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let k = self.small_int()?;
        let k = i32::try_from(k).map_err(|_| self.error_at(self.peek(), &["smaller exponent"]))?;
        Ok(base.pow(k).expect("nonnegative powers always exist"))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Int(i) => Ok(Expr::constant(Rational::from_integer(i.clone()))),
            Tok::Ident(name) => Ok(Expr::symbol(self.ident(name, &t)?)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, &["')'", "operator"])?;
                Ok(e)
            }
            _ => Err(self.error_at(&t, &["number", "identifier", "'('"])),
        }
    }

    fn ident(&self, name: &str, t: &Token) -> Result<Symbol, ParseError> {
        let n = self.n;
        let bad = |message: String| ParseError::Syntax {
            line: t.line,
            column: t.column,
            message,
            expected: ["t", "x", "x<digit>", "u", "u_<indices>"].map(String::from).to_vec(),
        };
        let out_of_range = |index: u32| ParseError::IndexOutOfRange {
            line: t.line,
            column: t.column,
            index,
            n,
        };
        let digit_index = |c: char| -> Result<usize, ParseError> {
            let d = c.to_digit(10).expect("checked digit");
            if d == 0 || d as usize > n {
                Err(out_of_range(d))
            } else {
                Ok(d as usize)
            }
        };
        match name {
            "t" => return Ok(Symbol::t()),
            "u" => return Ok(Symbol::u(n)),
            "x" if n == 1 => return Ok(Symbol::x(1)),
            "x" => return Err(bad(format!("'x' needs n = 1; use x1..x{n}"))),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix('x') {
            let mut chars = rest.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                if c.is_ascii_digit() {
                    return Ok(Symbol::x(digit_index(c)?));
                }
            }
            return Err(bad(format!("unknown identifier '{name}'")));
        }
        let Some(indices) = name.strip_prefix("u_") else {
            return Err(bad(format!("unknown identifier '{name}'")));
        };
        if indices.is_empty() || !indices.chars().all(|c| c.is_ascii_digit() || c == 'x' || c == 't') {
            return Err(bad(format!("malformed jet '{name}'")));
        }
        if indices.contains('t') {
            return Err(ParseError::TimeDerivativeOnRhs {
                line: t.line,
                column: t.column,
                token: name.to_string(),
            });
        }
        if indices.chars().all(|c| c == 'x') {
            if n != 1 {
                return Err(bad(format!("'{name}' needs n = 1; use digit indices")));
            }
            return Ok(Symbol::jet(1, &vec![1; indices.len()], 0));
        }
        if !indices.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(format!("jet '{name}' mixes index styles")));
        }
        let dirs = indices.chars().map(digit_index).collect::<Result<Vec<_>, _>>()?;
        Ok(Symbol::jet(n, &dirs, 0))
    }
}
