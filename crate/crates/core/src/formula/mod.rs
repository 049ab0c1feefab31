//! Quantifier-free formulas over variables `x[σ]` indexed by binary strings,
//! together with the reduct/ramification calculus.
//!
//! A formula is at *level* `n` when every variable index has length `n`.
//! The `m`-reduct replaces every `x[σ]` by `x[σ↾m]`; an `n`-ramification is
//! any formula whose reduct gives back the original.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::binary::BinaryString;
use crate::error::{Error, Result, SyntaxError};
use crate::model::MiniModel;

pub use parse::parse_formula;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(BinaryString),
    Lit(u64),
    Apply(String, Vec<Term>),
    /// `(t)#i`, the `i`-th least significant bit of `t`.
    Bit(Box<Term>, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Term, Rel, Term),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Term {
    pub fn var(index: BinaryString) -> Self {
        Term::Var(index)
    }

    pub fn bit(self, i: u32) -> Self {
        Term::Bit(Box::new(self), i)
    }

    /// `name(args)`, with the reserved identity `f0` of arity one elided.
    pub fn apply(name: &str, mut args: Vec<Term>) -> Self {
        if name == crate::model::IDENTITY && args.len() == 1 {
            return args.pop().unwrap();
        }
        Term::Apply(name.to_string(), args)
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a BinaryString>) {
        match self {
            Term::Var(s) => {
                out.insert(s);
            }
            Term::Lit(_) => {}
            Term::Apply(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Term::Bit(t, _) => t.collect_vars(out),
        }
    }

    fn collect_functions<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(_) | Term::Lit(_) => {}
            Term::Apply(name, args) => {
                out.insert(name);
                args.iter().for_each(|t| t.collect_functions(out));
            }
            Term::Bit(t, _) => t.collect_functions(out),
        }
    }

    fn try_map_vars<F>(&self, f: &mut F) -> Result<Term>
    where
        F: FnMut(&BinaryString) -> Result<BinaryString>,
    {
        Ok(match self {
            Term::Var(s) => Term::Var(f(s)?),
            Term::Lit(k) => Term::Lit(*k),
            Term::Apply(name, args) => Term::Apply(
                name.clone(),
                args.iter().map(|t| t.try_map_vars(f)).collect::<Result<_>>()?,
            ),
            Term::Bit(t, i) => Term::Bit(Box::new(t.try_map_vars(f)?), *i),
        })
    }

    pub fn eval(&self, asg: &Assignment, model: &MiniModel) -> Result<u64> {
        match self {
            Term::Var(s) => asg.get(s).ok_or_else(|| Error::MissingVariable(s.clone())),
            Term::Lit(k) => Ok(*k),
            Term::Apply(name, args) => {
                let vals = args
                    .iter()
                    .map(|t| t.eval(asg, model))
                    .collect::<Result<Vec<_>>>()?;
                model.apply(name, &vals)
            }
            Term::Bit(t, i) => Ok(model.bit(t.eval(asg, model)?, *i)),
        }
    }
}

impl Rel {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
            Rel::Lt => lhs < rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
        }
    }
}

impl Formula {
    pub fn atom(lhs: Term, rel: Rel, rhs: Term) -> Self {
        Formula::Atom(lhs, rel, rhs)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Distinct variable indices, sorted.
    pub fn variables(&self) -> BTreeSet<&BinaryString> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a BinaryString>) {
        match self {
            Formula::Atom(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Not(f) => f.collect_vars(out),
        }
    }

    pub fn functions(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(l, _, r) => {
                l.collect_functions(out);
                r.collect_functions(out);
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_functions(out)),
            Formula::Not(f) => f.collect_functions(out),
        }
    }

    /// The common length of all variable indices, or `None` for a
    /// variable-free formula.
    pub fn level(&self) -> Result<Option<usize>> {
        let vars = self.variables();
        let mut iter = vars.iter();
        let Some(first) = iter.next() else {
            return Ok(None);
        };
        let n = first.len();
        for v in iter {
            if v.len() != n {
                return Err(Error::MixedLevel {
                    expected: n,
                    index: (*v).clone(),
                });
            }
        }
        Ok(Some(n))
    }

    /// Checks that every variable index has length exactly `n`.
    pub fn check_level(&self, n: usize) -> Result<()> {
        for v in self.variables() {
            if v.len() != n {
                return Err(Error::MixedLevel {
                    expected: n,
                    index: v.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn try_map_vars<F>(&self, f: &mut F) -> Result<Formula>
    where
        F: FnMut(&BinaryString) -> Result<BinaryString>,
    {
        Ok(match self {
            Formula::Atom(l, rel, r) => Formula::Atom(l.try_map_vars(f)?, *rel, r.try_map_vars(f)?),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.try_map_vars(f)).collect::<Result<_>>()?),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.try_map_vars(f)).collect::<Result<_>>()?),
            Formula::Not(g) => Formula::Not(Box::new(g.try_map_vars(f)?)),
        })
    }

    /// The `m`-reduct: every `x[σ]` becomes `x[σ↾m]`.
    pub fn reduct(&self, m: usize) -> Result<Formula> {
        self.try_map_vars(&mut |s| s.prefix(m))
    }

    /// All `n_to`-ramifications of a formula at level `n_from`.
    ///
    /// With `k` distinct variables there are exactly `(2^(n_to - n_from))^k`
    /// of them: each variable independently picks one extension.
    pub fn ramifications(&self, n_from: usize, n_to: usize) -> Result<BTreeSet<Formula>> {
        self.check_level(n_from)?;
        if n_to < n_from {
            return Err(Error::Level {
                found: n_to,
                required: n_from,
            });
        }
        let vars: Vec<BinaryString> = self.variables().into_iter().cloned().collect();
        let delta = (n_to - n_from) as u32;
        let tails: Vec<BinaryString> = BinaryString::all_of_length(delta).collect();
        let mut out = BTreeSet::new();
        let mut choice = vec![0usize; vars.len()];
        loop {
            let subst: BTreeMap<&BinaryString, BinaryString> = vars
                .iter()
                .zip(&choice)
                .map(|(v, &c)| (v, v.concat(&tails[c])))
                .collect();
            out.insert(self.try_map_vars(&mut |s| Ok(subst[s].clone()))?);

            // odometer over choices
            let mut pos = vars.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < tails.len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }

    /// Canonical form used for set membership: nested conjunctions and
    /// disjunctions are flattened, their children sorted and deduplicated,
    /// and one-child connectives collapsed.
    pub fn canonical(&self) -> Formula {
        match self {
            Formula::Atom(..) => self.clone(),
            Formula::Not(f) => Formula::Not(Box::new(f.canonical())),
            Formula::And(fs) => {
                let mut flat = Vec::new();
                for f in fs {
                    match f.canonical() {
                        Formula::And(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Formula::And(flat)
                }
            }
            Formula::Or(fs) => {
                let mut flat = Vec::new();
                for f in fs {
                    match f.canonical() {
                        Formula::Or(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Formula::Or(flat)
                }
            }
        }
    }

    pub fn eval(&self, asg: &Assignment, model: &MiniModel) -> Result<bool> {
        match self {
            Formula::Atom(l, rel, r) => Ok(rel.holds(l.eval(asg, model)?, r.eval(asg, model)?)),
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(asg, model)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(asg, model)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Not(f) => Ok(!f.eval(asg, model)?),
        }
    }
}

/// Values for variables, e.g. a tuple `(b_τ : τ ∈ 2^n)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<BinaryString, u64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, index: BinaryString, value: u64) {
        self.0.insert(index, value);
    }

    pub fn get(&self, index: &BinaryString) -> Option<u64> {
        self.0.get(index).copied()
    }

    /// The assignment `τ ↦ values[τ as index]` for all `τ ∈ 2^level`.
    pub fn from_slots(level: u32, values: &[u64]) -> Self {
        Self(
            BinaryString::all_of_length(level)
                .zip(values.iter().copied())
                .collect(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BinaryString, u64)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }
}

impl FromIterator<(BinaryString, u64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (BinaryString, u64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(s) => write!(f, "x[{s}]"),
            Term::Lit(k) => write!(f, "{k}"),
            Term::Apply(name, args) => {
                write!(f, "{name}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Term::Bit(t, i) => write!(f, "({t})#{i}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            match g {
                Formula::And(_) | Formula::Or(_) => write!(f, "({g})"),
                _ => write!(f, "{g}"),
            }
        }
        match self {
            Formula::Atom(l, rel, r) => write!(f, "{l} {} {r}", rel.symbol()),
            Formula::Not(g) => {
                f.write_str("!")?;
                child(f, g)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    child(f, g)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_formula(s)
    }
}
