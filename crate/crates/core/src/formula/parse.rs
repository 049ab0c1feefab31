//! Recursive-descent parser for the formula text grammar:
//!
//! ```text
//! var     := "x[" ("0"|"1")* "]"
//! term    := var | nat | ident "(" term ("," term)* ")" | "(" term ")#" nat
//! atom    := term ("=" | "!=" | "<") term
//! formula := atom | formula "&" formula | formula "|" formula | "!" formula | "(" formula ")"
//! ```
//!
//! `!` binds tightest, then `&`, then `|`. Whitespace is allowed between
//! tokens but not inside `x[...]`.

use super::{Formula, Rel, Term};
use crate::binary::BinaryString;
use crate::error::SyntaxError;

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let first = self.conjunction()?;
        let mut parts = vec![first];
        while self.eat("|") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let first = self.unary()?;
        let mut parts = vec![first];
        while self.eat("&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        // `!=` never starts a formula, so a leading `!` is negation
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.peek() == Some(b'(') {
            // Either `(term)#n rel term` or a parenthesised formula.
            let start = self.pos;
            let atom_err = match self.atom() {
                Ok(a) => return Ok(a),
                Err(e) => e,
            };
            self.pos = start;
            self.pos += 1;
            let inner = self.formula().and_then(|f| {
                self.expect(")")?;
                Ok(f)
            });
            return match inner {
                Ok(f) => Ok(f),
                // report whichever reading got further
                Err(e) if e.offset >= atom_err.offset => Err(e),
                Err(_) => Err(atom_err),
            };
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.term()?;
        let rel = if self.eat("!=") {
            Rel::Ne
        } else if self.eat("=") {
            Rel::Eq
        } else if self.eat("<") {
            Rel::Lt
        } else {
            return Err(self.error("expected `=`, `!=` or `<`"));
        };
        let rhs = self.term()?;
        Ok(Formula::Atom(lhs, rel, rhs))
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.term()?;
                self.expect(")")?;
                self.expect("#")?;
                let i = self.nat()?;
                let i = u32::try_from(i).map_err(|_| self.error("bit index too large"))?;
                Ok(Term::Bit(Box::new(inner), i))
            }
            Some(c) if c.is_ascii_digit() => Ok(Term::Lit(self.nat()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                if c == b'x' && self.src.get(self.pos + 1) == Some(&b'[') {
                    return self.var();
                }
                let name = self.ident();
                self.expect("(")?;
                let mut args = vec![self.term()?];
                while self.eat(",") {
                    args.push(self.term()?);
                }
                self.expect(")")?;
                Ok(Term::Apply(name, args))
            }
            Some(_) => Err(self.error("expected a term")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn var(&mut self) -> Result<Term, SyntaxError> {
        self.pos += 2; // "x["
        let mut bits = Vec::new();
        while let Some(&c) = self.src.get(self.pos) {
            match c {
                b'0' => bits.push(false),
                b'1' => bits.push(true),
                _ => break,
            }
            self.pos += 1;
        }
        if self.src.get(self.pos) != Some(&b']') {
            return Err(self.error("expected `]` closing variable index"));
        }
        self.pos += 1;
        Ok(Term::Var(BinaryString::from_bits(bits)))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn nat(&mut self) -> Result<u64, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| SyntaxError {
                offset: start,
                message: "number too large".into(),
            })
    }
}
