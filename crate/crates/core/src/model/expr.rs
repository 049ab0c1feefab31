use std::fmt;

use super::mask;
use crate::error::{Error, Result};

/// Arithmetic body of a library function. Every operation is reduced mod
/// `2^a`, subtraction truncates at zero and division by zero yields zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithExpr {
    /// `a1`, `a2`, … (1-based)
    Arg(usize),
    Lit(u64),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Sub(Box<ArithExpr>, Box<ArithExpr>),
    Mul(Box<ArithExpr>, Box<ArithExpr>),
    Div(Box<ArithExpr>, Box<ArithExpr>),
    Rem(Box<ArithExpr>, Box<ArithExpr>),
    Bit(Box<ArithExpr>, u32),
}

impl ArithExpr {
    pub fn eval(&self, args: &[u64], width: u32) -> u64 {
        let m = mask(width);
        match self {
            ArithExpr::Arg(k) => args[k - 1] & m,
            ArithExpr::Lit(v) => v & m,
            ArithExpr::Add(l, r) => l.eval(args, width).wrapping_add(r.eval(args, width)) & m,
            ArithExpr::Sub(l, r) => l.eval(args, width).saturating_sub(r.eval(args, width)),
            ArithExpr::Mul(l, r) => l.eval(args, width).wrapping_mul(r.eval(args, width)) & m,
            ArithExpr::Div(l, r) => l.eval(args, width).checked_div(r.eval(args, width)).unwrap_or(0),
            ArithExpr::Rem(l, r) => l.eval(args, width).checked_rem(r.eval(args, width)).unwrap_or(0),
            ArithExpr::Bit(e, i) => {
                if *i >= width {
                    0
                } else {
                    (e.eval(args, width) >> i) & 1
                }
            }
        }
    }

    pub fn max_arg(&self) -> Option<usize> {
        match self {
            ArithExpr::Arg(k) => Some(*k),
            ArithExpr::Lit(_) => None,
            ArithExpr::Add(l, r)
            | ArithExpr::Sub(l, r)
            | ArithExpr::Mul(l, r)
            | ArithExpr::Div(l, r)
            | ArithExpr::Rem(l, r) => l.max_arg().max(r.max_arg()),
            ArithExpr::Bit(e, _) => e.max_arg(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ArithExpr::Add(..) | ArithExpr::Sub(..) => 1,
            ArithExpr::Mul(..) | ArithExpr::Div(..) | ArithExpr::Rem(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, l: &ArithExpr, op: &str, r: &ArithExpr| {
            let p = self.precedence();
            if l.precedence() < p {
                write!(f, "({l})")?;
            } else {
                write!(f, "{l}")?;
            }
            write!(f, " {op} ")?;
            // left-associative: equal precedence on the right needs parens
            if r.precedence() <= p {
                write!(f, "({r})")
            } else {
                write!(f, "{r}")
            }
        };
        match self {
            ArithExpr::Arg(k) => write!(f, "a{k}"),
            ArithExpr::Lit(v) => write!(f, "{v}"),
            ArithExpr::Add(l, r) => binary(f, l, "+", r),
            ArithExpr::Sub(l, r) => binary(f, l, "-", r),
            ArithExpr::Mul(l, r) => binary(f, l, "*", r),
            ArithExpr::Div(l, r) => binary(f, l, "/", r),
            ArithExpr::Rem(l, r) => binary(f, l, "%", r),
            ArithExpr::Bit(e, i) => write!(f, "({e})#{i}"),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<ArithExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::FunctionDef(format!(
            "{msg} at offset {} in {:?}",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<ArithExpr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = ArithExpr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = ArithExpr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<ArithExpr> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Some(c @ (b'*' | b'/' | b'%')) => c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = Box::new(self.primary()?);
            lhs = match op {
                b'*' => ArithExpr::Mul(Box::new(lhs), rhs),
                b'/' => ArithExpr::Div(Box::new(lhs), rhs),
                _ => ArithExpr::Rem(Box::new(lhs), rhs),
            };
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("expected a number"))
    }

    fn primary(&mut self) -> Result<ArithExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                if self.peek() == Some(b'#') {
                    self.pos += 1;
                    self.skip_ws();
                    let i = self.number()?;
                    let i = u32::try_from(i).map_err(|_| self.error("bit index too large"))?;
                    return Ok(ArithExpr::Bit(Box::new(inner), i));
                }
                Ok(inner)
            }
            Some(b'a') => {
                self.pos += 1;
                let k = self.number()?;
                if k == 0 {
                    return Err(self.error("arguments are numbered from a1"));
                }
                Ok(ArithExpr::Arg(k as usize))
            }
            Some(c) if c.is_ascii_digit() => Ok(ArithExpr::Lit(self.number()?)),
            _ => Err(self.error("expected `aK`, a number or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_wraps_and_truncates() {
        let e = parse("a1 - a2 * 3").unwrap();
        assert_eq!(e.eval(&[5, 1], 4), 2);
        assert_eq!(e.eval(&[1, 5], 4), 0);
        assert_eq!(parse("a1 * a1 + 1").unwrap().eval(&[7], 4), 2);
        assert_eq!(parse("a1 / 0").unwrap().eval(&[7], 4), 0);
        assert_eq!(parse("(a1 + 3)#2").unwrap().eval(&[1], 4), 1);
    }

    #[test]
    fn display_reparses() {
        for src in ["a1 + 1", "(a1 - a2) - 1", "a1 - (a2 - 1)", "(a1 + a2) * 3", "(a1 * 2)#1 % 2"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src}");
        }
        assert_eq!(parse("(a1 + 1)").unwrap().to_string(), "a1 + 1");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "a0", "a1 +", "b1", "(a1", "a1 a2"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
