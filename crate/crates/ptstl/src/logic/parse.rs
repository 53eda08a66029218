//! Recursive-descent parser for the ptSTL text grammar.
//!
//! ```text
//! expr     := or
//! or       := and ('|' and)*
//! and      := since ('&' since)*
//! since    := unary ('S' interval unary)*
//! unary    := '!' unary | 'F-' interval unary | 'G-' interval unary | primary
//! primary  := '(' expr ')' | 'true' | 'false' | atom
//! atom     := 'x'IDX ('<'|'>') num | 'u'IDX '=' num
//! num      := NUMBER | NAME'?'
//! interval := '[' time ',' time ']'     time := NATURAL | NAME'?'
//! ```
//!
//! `!` binds tightest, then `S`, then `&`, then `|`. Binary operators are
//! left-associative. Parameter slots are written `name?`.

use thiserror::Error;

use super::formula::{Formula, FormulaError, Relation};
use super::parametric::{NumTerm, ParamInterval, ParametricFormula, TimeTerm};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    fn new(pos: usize, msg: impl Into<String>) -> Self {
        ParseError {
            pos,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Not,
    And,
    Or,
    Lt,
    Gt,
    Eq,
    SinceOp,
    OnceOp,
    HistOp,
    True,
    False,
    StateVar(usize),
    ControlVar(usize),
    Number(f64),
    Slot(String),
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (tok, pos) = self.next_token()?;
            let done = tok == Tok::Eof;
            out.push((tok, pos));
            if done {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<(Tok, usize), ParseError> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, start));
        };
        let single = match b {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            b'!' => Some(Tok::Not),
            b'&' => Some(Tok::And),
            b'|' => Some(Tok::Or),
            b'<' => Some(Tok::Lt),
            b'>' => Some(Tok::Gt),
            b'=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if b.is_ascii_digit() || b == b'-' || b == b'.' {
            return self.lex_number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            return self.lex_word(start);
        }
        Err(ParseError::new(
            start,
            format!("unexpected character `{}`", &self.src[start..start + 1]),
        ))
    }

    fn lex_number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let mut seen_digit = false;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
            seen_digit = true;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
                seen_digit = true;
            }
        }
        if !seen_digit {
            return Err(ParseError::new(start, "malformed number"));
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(start, format!("malformed number `{text}`")))?;
        Ok((Tok::Number(value), start))
    }

    fn lex_word(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        let word = &self.src[start..self.pos];
        // A trailing `?` marks a parameter slot regardless of the name.
        if self.peek() == Some(b'?') {
            self.pos += 1;
            return Ok((Tok::Slot(word.to_owned()), start));
        }
        match word {
            "true" => return Ok((Tok::True, start)),
            "false" => return Ok((Tok::False, start)),
            "S" => return Ok((Tok::SinceOp, start)),
            "F" | "G" => {
                if self.peek() == Some(b'-') {
                    self.pos += 1;
                    let tok = if word == "F" { Tok::OnceOp } else { Tok::HistOp };
                    return Ok((tok, start));
                }
                return Err(ParseError::new(
                    start,
                    format!("expected `-[lo,hi]` after `{word}`"),
                ));
            }
            _ => {}
        }
        if let Some(idx) = word.strip_prefix('x').and_then(parse_index) {
            return Ok((Tok::StateVar(idx), start));
        }
        if let Some(idx) = word.strip_prefix('u').and_then(parse_index) {
            return Ok((Tok::ControlVar(idx), start));
        }
        Err(ParseError::new(
            start,
            format!("unknown identifier `{word}` (parameter slots end with `?`)"),
        ))
    }
}

fn parse_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    cursor: usize,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.cursor].0
    }

    fn pos(&self) -> usize {
        self.tokens[self.cursor].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.cursor].0.clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        tok
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected {what}")))
        }
    }

    fn or_expr(&mut self) -> Result<ParametricFormula, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = ParametricFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<ParametricFormula, ParseError> {
        let mut lhs = self.since_expr()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.since_expr()?;
            lhs = ParametricFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn since_expr(&mut self) -> Result<ParametricFormula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::SinceOp {
            self.bump();
            let window = self.interval()?;
            let rhs = self.unary()?;
            lhs = ParametricFormula::Since {
                left: Box::new(lhs),
                right: Box::new(rhs),
                window,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ParametricFormula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(ParametricFormula::not(self.unary()?))
            }
            Tok::OnceOp => {
                self.bump();
                let window = self.interval()?;
                Ok(ParametricFormula::once(self.unary()?, window))
            }
            Tok::HistOp => {
                self.bump();
                let window = self.interval()?;
                Ok(ParametricFormula::historically(self.unary()?, window))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<ParametricFormula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let inner = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::True => Ok(ParametricFormula::True),
            Tok::False => Ok(ParametricFormula::False),
            Tok::StateVar(var) => {
                if var >= self.n {
                    return Err(ParseError::new(
                        pos,
                        FormulaError::StateVarOutOfRange { var, n: self.n }.to_string(),
                    ));
                }
                let rel = match self.bump() {
                    Tok::Lt => Relation::Lt,
                    Tok::Gt => Relation::Gt,
                    _ => return Err(ParseError::new(pos, "expected `<` or `>` after state variable")),
                };
                let threshold = self.num_term()?;
                Ok(ParametricFormula::State {
                    var,
                    rel,
                    threshold,
                })
            }
            Tok::ControlVar(var) => {
                if var >= self.m {
                    return Err(ParseError::new(
                        pos,
                        FormulaError::ControlVarOutOfRange { var, m: self.m }.to_string(),
                    ));
                }
                self.expect(Tok::Eq, "`=` after control variable")?;
                let value = self.num_term()?;
                Ok(ParametricFormula::Control { var, value })
            }
            other => Err(ParseError::new(
                pos,
                format!("expected a formula, found {}", describe(&other)),
            )),
        }
    }

    fn num_term(&mut self) -> Result<NumTerm, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(x) => Ok(NumTerm::Lit(x)),
            Tok::Slot(name) => Ok(NumTerm::Slot(name)),
            other => Err(ParseError::new(
                pos,
                format!("expected a number or slot, found {}", describe(&other)),
            )),
        }
    }

    fn time_term(&mut self) -> Result<TimeTerm, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(x) => {
                if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
                    return Err(ParseError::new(
                        pos,
                        "interval bound must be a natural number",
                    ));
                }
                Ok(TimeTerm::Lit(x as u32))
            }
            Tok::Slot(name) => Ok(TimeTerm::Slot(name)),
            other => Err(ParseError::new(
                pos,
                format!("expected a time bound or slot, found {}", describe(&other)),
            )),
        }
    }

    fn interval(&mut self) -> Result<ParamInterval, ParseError> {
        let open = self.pos();
        self.expect(Tok::LBracket, "`[`")?;
        let lo = self.time_term()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.time_term()?;
        self.expect(Tok::RBracket, "`]`")?;
        if let (TimeTerm::Lit(a), TimeTerm::Lit(b)) = (&lo, &hi) {
            if a > b {
                return Err(ParseError::new(
                    open,
                    FormulaError::BadInterval { lo: *a, hi: *b }.to_string(),
                ));
            }
        }
        Ok(ParamInterval { lo, hi })
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Eof => "end of input".to_owned(),
        Tok::Number(x) => format!("number `{x}`"),
        Tok::Slot(name) => format!("slot `{name}?`"),
        Tok::StateVar(i) => format!("`x{i}`"),
        Tok::ControlVar(i) => format!("`u{i}`"),
        other => format!("`{other:?}`"),
    }
}

/// Parses a possibly-parametric formula over a system with `n` state and `m`
/// control variables. Slot names must be unique.
pub fn parse_parametric(text: &str, n: usize, m: usize) -> Result<ParametricFormula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        n,
        m,
    };
    let phi = parser.or_expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(ParseError::new(
            parser.pos(),
            format!("unexpected {}", describe(parser.peek())),
        ));
    }
    phi.free_parameters()
        .map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok(phi)
}

/// Parses a concrete formula; rejects any parameter slot.
pub fn parse_formula(text: &str, n: usize, m: usize) -> Result<Formula, ParseError> {
    let phi = parse_parametric(text, n, m)?;
    phi.try_into_formula()
        .map_err(|e| ParseError::new(0, e.to_string()))
}
