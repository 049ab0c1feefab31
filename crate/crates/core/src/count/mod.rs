//! Exact realization counting.
//!
//! A [`Problem`] is a set of formulas at level `n` compiled against a model:
//! variable `x[σ]` becomes slot `σ` (read MSB-first), so the search space is
//! `(2^a)^(2^n)` assignments. Back ends implement [`Counter`] and are looked
//! up by name in a [`CounterRegistry`]. Every back end is exact.

mod compressed;
mod exhaustive;
mod ir;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::model::MiniModel;

pub use compressed::Compressed;
pub use exhaustive::Exhaustive;
pub(crate) use ir::Prop;

/// Default cap on enumeration steps.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

/// Largest level whose slot count still fits the slot masks.
pub const MAX_LEVEL: u32 = 6;

pub struct Problem<'m> {
    pub(crate) model: &'m MiniModel,
    pub(crate) level: u32,
    pub(crate) props: Vec<Prop>,
    pub(crate) budget: u64,
}

impl<'m> Problem<'m> {
    pub fn new(model: &'m MiniModel, level: u32, formulas: &[Formula], budget: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::Range(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        let bits = model.width() as u64 * (1u64 << level);
        if bits > 127 {
            return Err(Error::Range(format!(
                "search space 2^{bits} does not fit exact 128-bit counts"
            )));
        }
        let props = formulas
            .iter()
            .map(|f| {
                f.check_level(level as usize)?;
                ir::compile(f, model)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            level,
            props,
            budget,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn slots(&self) -> usize {
        1 << self.level
    }

    /// `(2^a)^(2^n)`, the size of the full space.
    pub fn total(&self) -> u128 {
        1u128 << (self.model.width() as usize * self.slots())
    }
}

/// An exact counting strategy.
pub trait Counter: Send + Sync {
    fn name(&self) -> &'static str;

    /// `|p(N)|`: the number of slot assignments satisfying every formula.
    fn count(&self, problem: &Problem<'_>) -> Result<u128>;

    /// The lexicographically least satisfying assignment (slot 0 most
    /// significant), if any.
    fn first_solution(&self, problem: &Problem<'_>) -> Result<Option<Vec<u64>>>;
}

pub struct CounterRegistry {
    counters: BTreeMap<&'static str, Arc<dyn Counter>>,
}

impl CounterRegistry {
    pub fn new() -> Self {
        Self {
            counters: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::new();
        r.register(Exhaustive);
        r.register(Compressed);
        r
    }

    pub fn register<C: Counter + 'static>(&mut self, c: C) {
        self.counters.entry(c.name()).or_insert(Arc::new(c));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Counter>> {
        self.counters
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "counter",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.counters.keys().copied()
    }
}

impl Default for CounterRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryString;
    use crate::formula::Assignment;
    use proptest::prelude::*;

    fn formulas(src: &[&str]) -> Vec<Formula> {
        src.iter().map(|s| s.parse().unwrap()).collect()
    }

    /// Direct oracle over the formula AST, independent of the compiled IR.
    fn ast_count(model: &MiniModel, level: u32, fs: &[Formula]) -> u128 {
        let slots = 1usize << level;
        let d = model.domain_size();
        let mut vals = vec![0u64; slots];
        let mut n = 0u128;
        loop {
            let asg = Assignment::from_slots(level, &vals);
            if fs.iter().all(|f| f.eval(&asg, model).unwrap()) {
                n += 1;
            }
            let mut i = slots;
            loop {
                if i == 0 {
                    return n;
                }
                i -= 1;
                vals[i] += 1;
                if vals[i] < d {
                    break;
                }
                vals[i] = 0;
            }
        }
    }

    fn both(model: &MiniModel, level: u32, src: &[&str]) -> u128 {
        let fs = formulas(src);
        let p = Problem::new(model, level, &fs, DEFAULT_BUDGET).unwrap();
        let a = Exhaustive.count(&p).unwrap();
        let b = Compressed.count(&p).unwrap();
        assert_eq!(a, b, "{src:?}");
        assert_eq!(
            Exhaustive.first_solution(&p).unwrap(),
            Compressed.first_solution(&p).unwrap(),
            "{src:?}"
        );
        a
    }

    #[test]
    fn count_examples() {
        let m = MiniModel::new(3).unwrap();
        assert_eq!(both(&m, 0, &[]), 8);
        assert_eq!(both(&m, 0, &["(x[])#0 = 1"]), 4);
        assert_eq!(both(&m, 0, &["(x[])#0 = 1", "(x[])#0 = 0"]), 0);
        assert_eq!(both(&m, 1, &["x[0] < x[1]"]), 28);
        assert_eq!(both(&m, 1, &["(x[0])#0 != (x[1])#0", "1 < 2"]), 32);
        assert_eq!(both(&m, 1, &["2 < 1"]), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let m = MiniModel::new(4).unwrap();
        let p = Problem::new(&m, 2, &[], 1000).unwrap();
        assert!(matches!(Exhaustive.count(&p), Err(Error::BudgetExceeded { .. })));
        // nothing to enumerate: free slots factor out
        assert_eq!(Compressed.count(&p).unwrap(), 1 << 16);
    }

    #[test]
    fn rejects_oversized_space() {
        let m = MiniModel::new(20).unwrap();
        assert!(Problem::new(&m, 3, &[], DEFAULT_BUDGET).is_err());
        let fs = formulas(&["x[0] = 1"]);
        assert!(matches!(
            Problem::new(&m, 0, &fs, DEFAULT_BUDGET),
            Err(Error::MixedLevel { .. })
        ));
    }

    #[test]
    fn registry_lookup() {
        let r = CounterRegistry::standard();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["compressed", "exhaustive"]);
        assert!(matches!(r.get("sampling"), Err(Error::UnknownStrategy { .. })));
    }

    fn arb_atom(level: u32, a: u32) -> BoxedStrategy<String> {
        let label = move || (0usize..1 << level).prop_map(move |i| BinaryString::from_index(i, level));
        let term = move || {
            prop_oneof![
                label().prop_map(|s| format!("x[{s}]")),
                (label(), 0..a + 1).prop_map(|(s, i)| format!("(x[{s}])#{i}")),
                (label(), 0..a).prop_map(|(s, i)| format!("(succ(x[{s}]))#{i}")),
                (label(), label()).prop_map(|(s, t)| format!("add(x[{s}], x[{t}])")),
                (0u64..1 << a).prop_map(|k| k.to_string()),
            ]
        };
        (term(), prop_oneof![Just("="), Just("!="), Just("<")], term())
            .prop_map(|(l, r, t)| format!("{l} {r} {t}"))
            .boxed()
    }

    fn arb_problem() -> impl Strategy<Value = (u32, u32, Vec<String>)> {
        (1u32..4, 0u32..3).prop_flat_map(|(a, level)| {
            let atom = arb_atom(level, a);
            let formula = prop_oneof![
                3 => atom.clone(),
                1 => (atom.clone(), atom.clone()).prop_map(|(x, y)| format!("{x} | {y}")),
                1 => atom.prop_map(|x| format!("!{x}")),
            ];
            (Just(a), Just(level), proptest::collection::vec(formula, 0..5))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn back_ends_agree_with_ast_oracle((a, level, src) in arb_problem()) {
            let m = MiniModel::with_library(a, "succ/1 = a1 + 1\nadd/2 = a1 + a2").unwrap();
            let fs: Vec<Formula> = src.iter().map(|s| s.parse().unwrap()).collect();
            let p = Problem::new(&m, level, &fs, DEFAULT_BUDGET).unwrap();
            let oracle = ast_count(&m, level, &fs);
            prop_assert_eq!(Exhaustive.count(&p).unwrap(), oracle);
            prop_assert_eq!(Compressed.count(&p).unwrap(), oracle);
            let first = Compressed.first_solution(&p).unwrap();
            prop_assert_eq!(&first, &Exhaustive.first_solution(&p).unwrap());
            if let Some(vals) = first {
                let asg = Assignment::from_slots(level, &vals);
                for f in &fs {
                    prop_assert!(f.eval(&asg, &m).unwrap());
                }
            }
        }
    }
}
