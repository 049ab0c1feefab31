//! The finite stand-in for a nonstandard model: the domain `{0, …, 2^a − 1}`
//! with a library of definable functions.

mod builtins;
mod expr;

use std::collections::BTreeMap;
use std::fmt;

use crate::binary::BinaryString;
use crate::error::{Error, Result};

pub use builtins::{Builtin, BUILTINS};
pub use expr::ArithExpr;

/// Reserved name of the identity function.
pub const IDENTITY: &str = "f0";

/// Largest supported bit width.
pub const MAX_WIDTH: u32 = 32;

/// A coded set truncated to its first `d` members of ω: bit `i` is the
/// `i`-th least significant bit of the coding element.
pub type CodedPrefix = BinaryString;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuncBody {
    Expr(ArithExpr),
    Builtin(&'static Builtin),
}

/// A definable function `F: N^k → N`, total on the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub arity: usize,
    pub body: FuncBody,
}

impl FuncDef {
    /// Parses one library line, `name/arity = expression` or
    /// `name/arity = builtin <name>`.
    pub fn parse(line: &str) -> Result<FuncDef> {
        let (head, body) = line
            .split_once('=')
            .ok_or_else(|| Error::FunctionDef(format!("missing `=` in {line:?}")))?;
        let (name, arity) = head
            .trim()
            .split_once('/')
            .ok_or_else(|| Error::FunctionDef(format!("expected `name/arity` in {line:?}")))?;
        let name = name.trim();
        if name.is_empty()
            || !name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(Error::FunctionDef(format!("invalid function name {name:?}")));
        }
        let arity: usize = arity
            .trim()
            .parse()
            .map_err(|_| Error::FunctionDef(format!("invalid arity in {line:?}")))?;
        if arity == 0 {
            return Err(Error::FunctionDef(format!("`{name}` must have positive arity")));
        }
        let body = body.trim();
        let body = if let Some(b) = body.strip_prefix("builtin") {
            let b = b.trim();
            let builtin = builtins::lookup(b)
                .ok_or_else(|| Error::FunctionDef(format!("unknown builtin `{b}`")))?;
            if builtin.arity != arity {
                return Err(Error::FunctionDef(format!(
                    "builtin `{b}` has arity {}, declared {arity}",
                    builtin.arity
                )));
            }
            FuncBody::Builtin(builtin)
        } else {
            let e = expr::parse(body)?;
            if let Some(k) = e.max_arg() {
                if k > arity {
                    return Err(Error::FunctionDef(format!(
                        "`{name}` refers to a{k} but has arity {arity}"
                    )));
                }
            }
            FuncBody::Expr(e)
        };
        let def = FuncDef {
            name: name.to_string(),
            arity,
            body,
        };
        if def.name == IDENTITY && def != identity() {
            return Err(Error::FunctionDef("`f0` is reserved for the identity `f0/1 = a1`".into()));
        }
        Ok(def)
    }

    fn eval(&self, args: &[u64], width: u32) -> u64 {
        match &self.body {
            FuncBody::Expr(e) => e.eval(args, width),
            FuncBody::Builtin(b) => (b.eval)(args, width) & mask(width),
        }
    }
}

impl fmt::Display for FuncDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            FuncBody::Expr(e) => write!(f, "{}/{} = {e}", self.name, self.arity),
            FuncBody::Builtin(b) => write!(f, "{}/{} = builtin {}", self.name, self.arity, b.name),
        }
    }
}

fn identity() -> FuncDef {
    FuncDef {
        name: IDENTITY.into(),
        arity: 1,
        body: FuncBody::Expr(ArithExpr::Arg(1)),
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Index of a function inside a [`MiniModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FnId(usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniModel {
    width: u32,
    funcs: Vec<FuncDef>,
    by_name: BTreeMap<String, usize>,
}

impl MiniModel {
    /// A model of width `a` whose library holds only the identity `f0`.
    pub fn new(width: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Range(format!("bit width {width} outside 1..={MAX_WIDTH}")));
        }
        let mut m = Self {
            width,
            funcs: Vec::new(),
            by_name: BTreeMap::new(),
        };
        m.define(identity())?;
        Ok(m)
    }

    /// Builds a model from a function-library section, one definition per
    /// line; blank lines and `#` comments are skipped.
    pub fn with_library(width: u32, library: &str) -> Result<Self> {
        let mut m = Self::new(width)?;
        for line in library.lines() {
            // `#` also marks bit extraction, so only a free-standing `#` starts a comment
            let line = strip_comment(line.trim());
            if line.is_empty() {
                continue;
            }
            m.define(FuncDef::parse(line)?)?;
        }
        Ok(m)
    }

    /// Adds a definition. Redefining `f0` as the identity is a no-op.
    pub fn define(&mut self, def: FuncDef) -> Result<()> {
        if let Some(&i) = self.by_name.get(&def.name) {
            if self.funcs[i] == def {
                return Ok(());
            }
            return Err(Error::FunctionDef(format!("`{}` defined twice", def.name)));
        }
        self.by_name.insert(def.name.clone(), self.funcs.len());
        self.funcs.push(def);
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// `2^a`.
    pub fn domain_size(&self) -> u64 {
        1u64 << self.width
    }

    pub fn functions(&self) -> impl Iterator<Item = &FuncDef> {
        self.funcs.iter()
    }

    pub fn function(&self, name: &str) -> Result<&FuncDef> {
        self.by_name
            .get(name)
            .map(|&i| &self.funcs[i])
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    pub fn resolve(&self, name: &str, arity: usize) -> Result<FnId> {
        let &i = self
            .by_name
            .get(name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))?;
        let def = &self.funcs[i];
        if def.arity != arity {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: def.arity,
                found: arity,
            });
        }
        Ok(FnId(i))
    }

    pub fn apply_id(&self, id: FnId, args: &[u64]) -> u64 {
        self.funcs[id.0].eval(args, self.width)
    }

    pub fn apply(&self, name: &str, args: &[u64]) -> Result<u64> {
        let id = self.resolve(name, args.len())?;
        Ok(self.apply_id(id, args))
    }

    /// `(v)_i`; zero for `i ≥ a`.
    pub fn bit(&self, v: u64, i: u32) -> u64 {
        if i >= self.width || i >= 64 {
            0
        } else {
            (v >> i) & 1
        }
    }

    /// The library rendered one definition per line, omitting `f0`.
    pub fn library_text(&self) -> Vec<String> {
        self.funcs
            .iter()
            .filter(|f| f.name != IDENTITY)
            .map(ToString::to_string)
            .collect()
    }

    /// Same library at a different width.
    pub fn with_width(&self, width: u32) -> Result<Self> {
        let mut m = self.clone();
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Range(format!("bit width {width} outside 1..={MAX_WIDTH}")));
        }
        m.width = width;
        Ok(m)
    }

    fn check_element(&self, c: u64) -> Result<()> {
        if c >= self.domain_size() {
            return Err(Error::Range(format!(
                "{c} is not below 2^{} = {}",
                self.width,
                self.domain_size()
            )));
        }
        Ok(())
    }

    fn check_depth(&self, d: usize) -> Result<()> {
        if d > self.width as usize {
            return Err(Error::Range(format!("depth {d} exceeds width {}", self.width)));
        }
        Ok(())
    }

    /// The first `d` bits of the set coded by `c`, least significant first.
    pub fn decode_prefix(&self, c: u64, d: usize) -> Result<CodedPrefix> {
        self.check_element(c)?;
        self.check_depth(d)?;
        Ok(bits_of(c, d))
    }

    /// The least `c < 2^a` with `(f_i(c))_n = σ_i(n)` for every `i` and
    /// every `n < |σ_i|`, if there is one.
    pub fn witness_w(&self, sigmas: &[BinaryString], funcs: &[&str]) -> Result<Option<u64>> {
        if sigmas.len() != funcs.len() {
            return Err(Error::LengthMismatch(sigmas.len(), funcs.len()));
        }
        if let Some(first) = sigmas.first() {
            if let Some(bad) = sigmas.iter().find(|s| s.len() != first.len()) {
                return Err(Error::LengthMismatch(first.len(), bad.len()));
            }
            self.check_depth(first.len())?;
        }
        let ids = funcs
            .iter()
            .map(|f| self.resolve(f, 1))
            .collect::<Result<Vec<_>>>()?;
        let targets: Vec<(u64, u64)> = sigmas
            .iter()
            .map(|s| (encode_bits(s), mask(s.len() as u32)))
            .collect();
        Ok((0..self.domain_size()).find(|&c| {
            ids.iter()
                .zip(&targets)
                .all(|(&id, &(bits, m))| self.apply_id(id, &[c]) & m == bits)
        }))
    }

    /// Values of every unary library function at `b`: the miniature of the
    /// universe `{F(b)}` of an extension generated by `b`.
    pub fn skolem_orbit(&self, b: u64) -> Result<BTreeMap<String, u64>> {
        self.check_element(b)?;
        Ok(self
            .funcs
            .iter()
            .enumerate()
            .filter(|(_, f)| f.arity == 1)
            .map(|(i, f)| (f.name.clone(), self.apply_id(FnId(i), &[b])))
            .collect())
    }
}

fn strip_comment(line: &str) -> &str {
    // a comment starts at `#` preceded by whitespace and not followed by a digit
    let bytes = line.as_bytes();
    for (i, &c) in bytes.iter().enumerate() {
        if c == b'#'
            && (i == 0 || bytes[i - 1].is_ascii_whitespace())
            && !bytes.get(i + 1).is_some_and(u8::is_ascii_digit)
        {
            return line[..i].trim_end();
        }
    }
    line
}

/// The first `d` bits of `c`, least significant first.
pub fn bits_of(c: u64, d: usize) -> BinaryString {
    BinaryString::from_bits((0..d).map(|i| i < 64 && (c >> i) & 1 == 1).collect())
}

/// Inverse of [`bits_of`]: bit `n` of the string becomes bit `n` of the value.
pub fn encode_bits(s: &BinaryString) -> u64 {
    s.bits()
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn decode_prefix_examples() {
        let m = MiniModel::new(3).unwrap();
        assert_eq!(m.decode_prefix(6, 3).unwrap(), bs("011"));
        assert_eq!(m.decode_prefix(0, 2).unwrap(), bs("00"));
        assert_eq!(m.decode_prefix(7, 3).unwrap(), bs("111"));
        assert!(matches!(m.decode_prefix(8, 3), Err(Error::Range(_))));
        assert!(matches!(m.decode_prefix(1, 4), Err(Error::Range(_))));
    }

    #[test]
    fn decode_prefix_is_injective_mod_2d() {
        let m = MiniModel::new(5).unwrap();
        for d in 0..=5usize {
            let mut seen = std::collections::BTreeMap::new();
            for c in 0..32u64 {
                let p = m.decode_prefix(c, d).unwrap();
                let residue = *seen.entry(p.clone()).or_insert(c % (1 << d));
                assert_eq!(residue, c % (1 << d));
                assert_eq!(encode_bits(&p), c % (1 << d));
            }
            assert_eq!(seen.len(), 1 << d);
        }
    }

    #[test]
    fn witness_examples() {
        let m = MiniModel::new(3).unwrap();
        assert_eq!(m.witness_w(&[bs("10")], &["f0"]).unwrap(), Some(1));
        assert_eq!(m.witness_w(&[bs("")], &["f0"]).unwrap(), Some(0));
        assert_eq!(m.witness_w(&[bs("0"), bs("1")], &["f0", "f0"]).unwrap(), None);
        assert!(matches!(
            m.witness_w(&[bs("0")], &["nope"]),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    fn witness_matches_brute_force() {
        let m = MiniModel::with_library(4, "succ/1 = a1 + 1\nsq/1 = a1 * a1").unwrap();
        for s0 in BinaryString::all_of_length(2) {
            for s1 in BinaryString::all_of_length(2) {
                let w = m.witness_w(&[s0.clone(), s1.clone()], &["succ", "sq"]).unwrap();
                let oracle = (0..16u64).find(|&c| {
                    bits_of((c + 1) % 16, 2) == s0 && bits_of((c * c) % 16, 2) == s1
                });
                assert_eq!(w, oracle);
            }
        }
    }

    #[test]
    fn skolem_orbit_examples() {
        let m = MiniModel::with_library(3, "succ/1 = a1 + 1").unwrap();
        let orbit = m.skolem_orbit(5).unwrap();
        assert_eq!(orbit, BTreeMap::from([("f0".into(), 5), ("succ".into(), 6)]));
        assert_eq!(m.skolem_orbit(7).unwrap()["succ"], 0);
        let id_only = MiniModel::new(3).unwrap();
        assert_eq!(id_only.skolem_orbit(5).unwrap(), BTreeMap::from([("f0".into(), 5)]));
    }

    #[test]
    fn library_parsing() {
        let m = MiniModel::with_library(
            4,
            "# library\nf0/1 = a1\nadd/2 = a1 + a2   # wraps\nhi/1 = (a1)#3\nrot/1 = builtin rotl\n",
        )
        .unwrap();
        assert_eq!(m.apply("add", &[9, 9]).unwrap(), 2);
        assert_eq!(m.apply("hi", &[8]).unwrap(), 1);
        assert_eq!(m.apply("rot", &[0b1001]).unwrap(), 0b0011);
        assert!(matches!(m.apply("add", &[1]), Err(Error::Arity { .. })));
        assert!(MiniModel::with_library(4, "f0/1 = a1 + 1").is_err());
        assert!(MiniModel::with_library(4, "g/1 = a2").is_err());
        assert!(MiniModel::with_library(4, "g/1 = a1\ng/1 = a1 + 1").is_err());
        assert!(MiniModel::with_library(4, "g/1 = builtin nosuch").is_err());
        assert_eq!(
            m.library_text(),
            vec!["add/2 = a1 + a2", "hi/1 = (a1)#3", "rot/1 = builtin rotl"]
        );
    }

    #[test]
    fn bit_beyond_width_is_zero() {
        let m = MiniModel::new(3).unwrap();
        assert_eq!(m.bit(0b1111, 3), 0);
        assert_eq!(m.bit(0b0100, 2), 1);
    }
}
