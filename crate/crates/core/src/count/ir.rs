//! Slot-indexed form of formulas used by the counting back ends.

use crate::error::Result;
use crate::formula::{Formula, Rel, Term};
use crate::model::{FnId, MiniModel};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Expr {
    Slot(usize),
    Lit(u64),
    Apply(FnId, Vec<Expr>),
    Bit(Box<Expr>, u32),
    /// A precomputed observation of one slot.
    Obs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Prop {
    Atom(Expr, Rel, Expr),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Not(Box<Prop>),
    /// A precomputed boolean observation of one slot (0 or 1).
    Obs(usize),
}

pub(crate) trait Env {
    fn slot(&self, s: usize) -> u64;
    fn obs(&self, o: usize) -> u64;
}

/// Environment over raw slot values.
pub(crate) struct Values<'a>(pub &'a [u64]);

impl Env for Values<'_> {
    fn slot(&self, s: usize) -> u64 {
        self.0[s]
    }

    fn obs(&self, _: usize) -> u64 {
        unreachable!("raw evaluation never sees observations")
    }
}

/// Environment binding a single slot to one value.
pub(crate) struct Single(pub u64);

impl Env for Single {
    fn slot(&self, _: usize) -> u64 {
        self.0
    }

    fn obs(&self, _: usize) -> u64 {
        unreachable!("observations are built from raw expressions")
    }
}

pub(crate) fn compile(f: &Formula, model: &MiniModel) -> Result<Prop> {
    Ok(match f {
        Formula::Atom(l, rel, r) => Prop::Atom(compile_term(l, model)?, *rel, compile_term(r, model)?),
        Formula::And(fs) => Prop::And(fs.iter().map(|g| compile(g, model)).collect::<Result<_>>()?),
        Formula::Or(fs) => Prop::Or(fs.iter().map(|g| compile(g, model)).collect::<Result<_>>()?),
        Formula::Not(g) => Prop::Not(Box::new(compile(g, model)?)),
    })
}

fn compile_term(t: &Term, model: &MiniModel) -> Result<Expr> {
    Ok(match t {
        Term::Var(s) => Expr::Slot(s.index()),
        Term::Lit(k) => Expr::Lit(*k),
        Term::Apply(name, args) => Expr::Apply(
            model.resolve(name, args.len())?,
            args.iter().map(|a| compile_term(a, model)).collect::<Result<_>>()?,
        ),
        Term::Bit(inner, i) => Expr::Bit(Box::new(compile_term(inner, model)?), *i),
    })
}

impl Expr {
    pub(crate) fn eval<E: Env>(&self, env: &E, model: &MiniModel) -> u64 {
        match self {
            Expr::Slot(s) => env.slot(*s),
            Expr::Lit(k) => *k,
            Expr::Apply(id, args) => {
                let mut buf = [0u64; 4];
                if args.len() <= buf.len() {
                    for (b, a) in buf.iter_mut().zip(args) {
                        *b = a.eval(env, model);
                    }
                    model.apply_id(*id, &buf[..args.len()])
                } else {
                    let vals: Vec<u64> = args.iter().map(|a| a.eval(env, model)).collect();
                    model.apply_id(*id, &vals)
                }
            }
            Expr::Bit(e, i) => model.bit(e.eval(env, model), *i),
            Expr::Obs(o) => env.obs(*o),
        }
    }

    /// Bit mask of the slots mentioned.
    pub(crate) fn slots(&self) -> u64 {
        match self {
            Expr::Slot(s) => 1 << s,
            Expr::Lit(_) | Expr::Obs(_) => 0,
            Expr::Apply(_, args) => args.iter().fold(0, |m, a| m | a.slots()),
            Expr::Bit(e, _) => e.slots(),
        }
    }
}

impl Prop {
    pub(crate) fn eval<E: Env>(&self, env: &E, model: &MiniModel) -> bool {
        match self {
            Prop::Atom(l, rel, r) => rel.holds(l.eval(env, model), r.eval(env, model)),
            Prop::And(ps) => ps.iter().all(|p| p.eval(env, model)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(env, model)),
            Prop::Not(p) => !p.eval(env, model),
            Prop::Obs(o) => env.obs(*o) != 0,
        }
    }

    pub(crate) fn slots(&self) -> u64 {
        match self {
            Prop::Atom(l, _, r) => l.slots() | r.slots(),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().fold(0, |m, p| m | p.slots()),
            Prop::Not(p) => p.slots(),
            Prop::Obs(_) => 0,
        }
    }
}
