//! Recursive-descent parser for the `{u3, cx, measure}` subset of OpenQASM 2.0.
//!
//! ```text
//! program   := header include* statement* EOF
//! header    := "OPENQASM" NUMBER ";"
//! include   := "include" STRING ";"
//! statement := "qreg" reg ";" | "creg" reg ";"
//!            | ("u3" | "U") "(" expr "," expr "," expr ")" arg ";"
//!            | ("cx" | "CX") arg "," arg ";"
//!            | "measure" arg "->" arg ";"
//! reg, arg  := IDENT "[" NUMBER "]"
//! expr      := term (("+" | "-") term)*
//! term      := unary (("*" | "/") unary)*
//! unary     := "-" unary | "+" unary | atom
//! atom      := NUMBER | "pi" | "(" expr ")"
//! ```

use std::f64::consts::PI;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{QasmDocument, QasmError, Register, Statement};

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, QasmError> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, QasmError> {
        let t = self.next();
        if t.tok == want {
            Ok(t.pos)
        } else {
            Err(QasmError::syntax(t.pos, format!("expected {want}, found {}", t.tok)))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(QasmError::syntax(t.pos, format!("expected identifier, found {other}"))),
        }
    }

    fn index(&mut self) -> Result<usize, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Number(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e9 => Ok(x as usize),
            other => Err(QasmError::syntax(
                t.pos,
                format!("expected non-negative integer, found {other}"),
            )),
        }
    }

    fn register_ref(&mut self) -> Result<(String, usize, Pos), QasmError> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::LBracket)?;
        let idx = self.index()?;
        self.expect(Tok::RBracket)?;
        Ok((name, idx, pos))
    }

    pub(crate) fn expr(&mut self) -> Result<f64, QasmError> {
        let mut value = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    value += self.term()?;
                }
                Tok::Minus => {
                    self.next();
                    value -= self.term()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut value = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    value *= self.unary()?;
                }
                Tok::Slash => {
                    let pos = self.next().pos;
                    let d = self.unary()?;
                    if d == 0.0 {
                        return Err(QasmError::syntax(pos, "division by zero"));
                    }
                    value /= d;
                }
                _ => return Ok(value),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Number(x) => Ok(x),
            Tok::Ident(ref s) if s == "pi" => Ok(PI),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            other => Err(QasmError::syntax(t.pos, format!("expected angle expression, found {other}"))),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub(crate) fn expect_eof(&mut self) -> Result<(), QasmError> {
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            return Err(QasmError::syntax(t.pos, format!("unexpected {}", t.tok)));
        }
        Ok(())
    }

    fn header(&mut self) -> Result<String, QasmError> {
        let (kw, pos) = self.ident()?;
        if kw != "OPENQASM" {
            return Err(QasmError::syntax(pos, "expected `OPENQASM` header"));
        }
        let t = self.next();
        let version = match t.tok {
            Tok::Number(2.0) => "2.0".to_string(),
            other => {
                return Err(QasmError::syntax(
                    t.pos,
                    format!("unsupported version {other}; only 2.0 is accepted"),
                ))
            }
        };
        self.expect(Tok::Semi)?;
        Ok(version)
    }

    fn declare(
        &mut self,
        slot: &mut Option<Register>,
        kind: &str,
        pos: Pos,
    ) -> Result<(), QasmError> {
        let (name, size, _) = self.register_ref()?;
        self.expect(Tok::Semi)?;
        if slot.is_some() {
            return Err(QasmError::RegisterMismatch {
                pos,
                message: format!("second {kind} declaration; only one register is supported"),
            });
        }
        *slot = Some(Register { name, size });
        Ok(())
    }

    fn resolve(
        reg: &Option<Register>,
        kind: &str,
        (name, idx, pos): (String, usize, Pos),
    ) -> Result<usize, QasmError> {
        let reg = reg.as_ref().ok_or_else(|| QasmError::RegisterMismatch {
            pos,
            message: format!("{kind} `{name}` used before any {kind} declaration"),
        })?;
        if reg.name != name {
            return Err(QasmError::RegisterMismatch {
                pos,
                message: format!("unknown {kind} `{name}` (declared `{}`)", reg.name),
            });
        }
        if idx >= reg.size {
            return Err(QasmError::RegisterMismatch {
                pos,
                message: format!("index {idx} out of range for {kind} `{name}[{}]`", reg.size),
            });
        }
        Ok(idx)
    }

    pub(crate) fn document(&mut self) -> Result<QasmDocument, QasmError> {
        let version = self.header()?;
        let mut includes = Vec::new();
        let (mut qreg, mut creg) = (None, None);
        let mut statements = Vec::new();
        while !self.at_eof() {
            let (word, pos) = self.ident()?;
            match word.as_str() {
                "include" => {
                    let t = self.next();
                    match t.tok {
                        Tok::Str(s) => includes.push(s),
                        other => {
                            return Err(QasmError::syntax(t.pos, format!("expected file name, found {other}")))
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                "qreg" => self.declare(&mut qreg, "qreg", pos)?,
                "creg" => self.declare(&mut creg, "creg", pos)?,
                "u3" | "U" => {
                    self.expect(Tok::LParen)?;
                    let theta = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let phi = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let lam = self.expr()?;
                    self.expect(Tok::RParen)?;
                    let q = Self::resolve(&qreg, "qreg", self.register_ref()?)?;
                    self.expect(Tok::Semi)?;
                    statements.push(Statement::U3 {
                        angles: [theta, phi, lam],
                        qubit: q,
                    });
                }
                "cx" | "CX" => {
                    let control = Self::resolve(&qreg, "qreg", self.register_ref()?)?;
                    self.expect(Tok::Comma)?;
                    let target = Self::resolve(&qreg, "qreg", self.register_ref()?)?;
                    self.expect(Tok::Semi)?;
                    if control == target {
                        return Err(QasmError::syntax(pos, "cx control equals target"));
                    }
                    statements.push(Statement::Cx { control, target });
                }
                "measure" => {
                    let qubit = Self::resolve(&qreg, "qreg", self.register_ref()?)?;
                    self.expect(Tok::Arrow)?;
                    let clbit = Self::resolve(&creg, "creg", self.register_ref()?)?;
                    self.expect(Tok::Semi)?;
                    statements.push(Statement::Measure { qubit, clbit });
                }
                _ => {
                    return Err(QasmError::UnsupportedGate { name: word, pos });
                }
            }
        }
        let qreg = qreg.ok_or_else(|| QasmError::RegisterMismatch {
            pos: self.peek().pos,
            message: "missing qreg declaration".into(),
        })?;
        Ok(QasmDocument {
            version,
            includes,
            qreg,
            creg,
            statements,
        })
    }
}
