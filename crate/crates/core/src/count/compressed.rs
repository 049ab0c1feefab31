//! Exact counting over observation classes.
//!
//! Each formula reads a slot only through its maximal single-slot
//! subexpressions (`(x[σ])#3`, `(succ(x[σ]))#0`, a whole one-variable atom,
//! …). Domain values that agree on every such observation are
//! interchangeable, so each slot's domain is partitioned into classes with
//! multiplicities. Slots linked by no formula factor apart, and within a
//! linked component a depth-first search over classes is memoised on the
//! observation values that later formulas still read.

use std::collections::{BTreeMap, HashMap};

use super::ir::{Env, Expr, Prop, Single};
use super::{Counter, Problem};
use crate::error::{Error, Result};
use crate::model::MiniModel;

pub struct Compressed;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ObsDef {
    Term(Expr),
    Prop(Prop),
}

#[derive(Default)]
struct ObsTable {
    index: HashMap<(usize, ObsDef), usize>,
    slot: Vec<usize>,
    feature: Vec<usize>,
    per_slot: BTreeMap<usize, Vec<ObsDef>>,
}

impl ObsTable {
    fn register(&mut self, slot: usize, def: ObsDef) -> usize {
        if let Some(&o) = self.index.get(&(slot, def.clone())) {
            return o;
        }
        let defs = self.per_slot.entry(slot).or_default();
        let o = self.slot.len();
        self.slot.push(slot);
        self.feature.push(defs.len());
        defs.push(def.clone());
        self.index.insert((slot, def), o);
        o
    }

    fn lift_expr(&mut self, e: &Expr, used: &mut Vec<usize>) -> Expr {
        let m = e.slots();
        if m == 0 {
            return e.clone();
        }
        if m.count_ones() == 1 {
            let o = self.register(m.trailing_zeros() as usize, ObsDef::Term(e.clone()));
            used.push(o);
            return Expr::Obs(o);
        }
        match e {
            Expr::Apply(id, args) => Expr::Apply(*id, args.iter().map(|a| self.lift_expr(a, used)).collect()),
            Expr::Bit(inner, i) => Expr::Bit(Box::new(self.lift_expr(inner, used)), *i),
            Expr::Slot(_) | Expr::Lit(_) | Expr::Obs(_) => unreachable!("leaves mention at most one slot"),
        }
    }

    fn lift_prop(&mut self, p: &Prop, used: &mut Vec<usize>) -> Prop {
        let m = p.slots();
        if m == 0 {
            return p.clone();
        }
        if m.count_ones() == 1 {
            let o = self.register(m.trailing_zeros() as usize, ObsDef::Prop(p.clone()));
            used.push(o);
            return Prop::Obs(o);
        }
        match p {
            Prop::Atom(l, rel, r) => Prop::Atom(self.lift_expr(l, used), *rel, self.lift_expr(r, used)),
            Prop::And(ps) => Prop::And(ps.iter().map(|q| self.lift_prop(q, used)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|q| self.lift_prop(q, used)).collect()),
            Prop::Not(q) => Prop::Not(Box::new(self.lift_prop(q, used))),
            Prop::Obs(_) => unreachable!(),
        }
    }
}

/// Classes of one slot, sorted by least member.
struct Classes {
    reps: Vec<u64>,
    mults: Vec<u128>,
    features: Vec<Vec<u64>>,
}

struct Residual {
    prop: Prop,
    mask: u64,
    obs: Vec<usize>,
}

struct Prepared<'m> {
    model: &'m MiniModel,
    /// False when some variable-free formula is false.
    feasible: bool,
    residuals: Vec<Residual>,
    obs: ObsTable,
    classes: BTreeMap<usize, Classes>,
    components: Vec<Vec<usize>>,
    free_slots: usize,
    steps: u64,
    budget: u64,
}

impl<'m> Prepared<'m> {
    fn new(p: &Problem<'m>) -> Result<Self> {
        let model = p.model;
        let mut obs = ObsTable::default();
        let mut residuals = Vec::new();
        let mut filters: BTreeMap<usize, Vec<Prop>> = BTreeMap::new();
        let mut feasible = true;
        for prop in &p.props {
            let mask = prop.slots();
            match mask.count_ones() {
                0 => feasible &= prop.eval(&Single(0), model),
                1 => filters
                    .entry(mask.trailing_zeros() as usize)
                    .or_default()
                    .push(prop.clone()),
                _ => {
                    let mut used = Vec::new();
                    let lifted = obs.lift_prop(prop, &mut used);
                    used.sort_unstable();
                    used.dedup();
                    residuals.push(Residual {
                        prop: lifted,
                        mask,
                        obs: used,
                    });
                }
            }
        }

        // union-find over slots joined by multi-slot formulas
        let slots = p.slots();
        let mut parent: Vec<usize> = (0..slots).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        let mut touched = 0u64;
        for r in &residuals {
            touched |= r.mask;
            let first = r.mask.trailing_zeros() as usize;
            let mut m = r.mask & (r.mask - 1);
            while m != 0 {
                let s = m.trailing_zeros() as usize;
                let (a, b) = (find(&mut parent, first), find(&mut parent, s));
                parent[a.max(b)] = a.min(b);
                m &= m - 1;
            }
        }
        for &s in filters.keys() {
            touched |= 1 << s;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in 0..slots {
            if touched >> s & 1 == 1 {
                let root = find(&mut parent, s);
                groups.entry(root).or_default().push(s);
            }
        }

        let mut prepared = Prepared {
            model,
            feasible,
            residuals,
            obs,
            classes: BTreeMap::new(),
            components: groups.into_values().collect(),
            free_slots: slots - touched.count_ones() as usize,
            steps: 0,
            budget: p.budget,
        };
        if !feasible {
            return Ok(prepared);
        }
        for s in 0..slots {
            if touched >> s & 1 == 1 {
                let c = prepared.build_classes(s, filters.get(&s).map(Vec::as_slice).unwrap_or(&[]))?;
                prepared.classes.insert(s, c);
            }
        }
        Ok(prepared)
    }

    fn tick(&mut self, n: u64) -> Result<()> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded {
                needed: self.steps as u128,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn build_classes(&mut self, slot: usize, filters: &[Prop]) -> Result<Classes> {
        let d = self.model.domain_size();
        self.tick(d)?;
        let defs = self.obs.per_slot.get(&slot).cloned().unwrap_or_default();
        let mut by_features: BTreeMap<Vec<u64>, (u64, u128)> = BTreeMap::new();
        for v in 0..d {
            let env = Single(v);
            if !filters.iter().all(|f| f.eval(&env, self.model)) {
                continue;
            }
            let key: Vec<u64> = defs
                .iter()
                .map(|def| match def {
                    ObsDef::Term(e) => e.eval(&env, self.model),
                    ObsDef::Prop(p) => p.eval(&env, self.model) as u64,
                })
                .collect();
            by_features.entry(key).or_insert((v, 0)).1 += 1;
        }
        let mut rows: Vec<(u64, u128, Vec<u64>)> = by_features
            .into_iter()
            .map(|(f, (rep, mult))| (rep, mult, f))
            .collect();
        rows.sort_unstable_by_key(|r| r.0);
        Ok(Classes {
            reps: rows.iter().map(|r| r.0).collect(),
            mults: rows.iter().map(|r| r.1).collect(),
            features: rows.into_iter().map(|r| r.2).collect(),
        })
    }

    fn search(&self, component: &[usize], order: Vec<usize>) -> Search<'_> {
        let position: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let within = component.iter().fold(0u64, |m, &s| m | 1 << s);
        let mut triggers = vec![Vec::new(); order.len()];
        for (i, r) in self.residuals.iter().enumerate() {
            if r.mask & within == 0 {
                continue;
            }
            let depth = bits(r.mask).map(|s| position[&s]).max().unwrap();
            triggers[depth].push(i);
        }
        // observations of already-placed slots still read at or after each depth
        let mut key_refs = vec![Vec::new(); order.len()];
        for (depth, refs) in key_refs.iter_mut().enumerate() {
            for later in &triggers[depth..] {
                for &ri in later {
                    for &o in &self.residuals[ri].obs {
                        if position[&self.obs.slot[o]] < depth {
                            refs.push(o);
                        }
                    }
                }
            }
            refs.sort_unstable();
            refs.dedup();
        }
        let slots = self.classes.keys().max().map_or(0, |m| m + 1);
        Search {
            prepared: self,
            memo: vec![HashMap::new(); order.len()],
            order,
            triggers,
            key_refs,
            assigned: vec![0; slots],
            steps: 0,
        }
    }

    /// Most-connected-first ordering, so formulas are checked early.
    fn counting_order(&self, component: &[usize]) -> Vec<usize> {
        let within = component.iter().fold(0u64, |m, &s| m | 1 << s);
        let masks: Vec<u64> = self
            .residuals
            .iter()
            .map(|r| r.mask)
            .filter(|m| m & within != 0)
            .collect();
        let degree = |s: usize| masks.iter().filter(|&&m| m >> s & 1 == 1).count();
        let mut order = Vec::with_capacity(component.len());
        let mut chosen = 0u64;
        while order.len() < component.len() {
            let next = component
                .iter()
                .copied()
                .filter(|&s| chosen >> s & 1 == 0)
                .max_by_key(|&s| {
                    let linked = masks.iter().filter(|&&m| m >> s & 1 == 1 && m & chosen != 0).count();
                    (linked, degree(s), std::cmp::Reverse(s))
                })
                .unwrap();
            chosen |= 1 << next;
            order.push(next);
        }
        order
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let s = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(s)
    })
}

struct Search<'p> {
    prepared: &'p Prepared<'p>,
    order: Vec<usize>,
    triggers: Vec<Vec<usize>>,
    key_refs: Vec<Vec<usize>>,
    memo: Vec<HashMap<Vec<u64>, u128>>,
    assigned: Vec<usize>,
    steps: u64,
}

impl Env for Search<'_> {
    fn slot(&self, s: usize) -> u64 {
        self.prepared.classes[&s].reps[self.assigned[s]]
    }

    fn obs(&self, o: usize) -> u64 {
        let slot = self.prepared.obs.slot[o];
        self.prepared.classes[&slot].features[self.assigned[slot]][self.prepared.obs.feature[o]]
    }
}

impl Search<'_> {
    fn admissible(&self, depth: usize) -> bool {
        self.triggers[depth]
            .iter()
            .all(|&i| self.prepared.residuals[i].prop.eval(self, self.prepared.model))
    }

    fn count_from(&mut self, depth: usize) -> Result<u128> {
        if depth == self.order.len() {
            return Ok(1);
        }
        let key: Vec<u64> = self.key_refs[depth].iter().map(|&o| self.obs(o)).collect();
        if let Some(&hit) = self.memo[depth].get(&key) {
            return Ok(hit);
        }
        let slot = self.order[depth];
        let n = self.prepared.classes[&slot].reps.len();
        self.steps += n as u64;
        if self.prepared.steps.saturating_add(self.steps) > self.prepared.budget {
            return Err(Error::BudgetExceeded {
                needed: (self.prepared.steps + self.steps) as u128,
                budget: self.prepared.budget,
            });
        }
        let mut total = 0u128;
        for c in 0..n {
            self.assigned[slot] = c;
            if self.admissible(depth) {
                let rest = self.count_from(depth + 1)?;
                total += self.prepared.classes[&slot].mults[c] * rest;
            }
        }
        self.memo[depth].insert(key, total);
        Ok(total)
    }
}

impl Counter for Compressed {
    fn name(&self) -> &'static str {
        "compressed"
    }

    fn count(&self, problem: &Problem<'_>) -> Result<u128> {
        let mut prep = Prepared::new(problem)?;
        if !prep.feasible {
            return Ok(0);
        }
        let d = problem.model.domain_size() as u128;
        let mut total = d.pow(prep.free_slots as u32);
        for component in prep.components.clone() {
            let order = prep.counting_order(&component);
            let mut search = prep.search(&component, order);
            let c = search.count_from(0)?;
            let used = search.steps;
            prep.steps += used;
            if c == 0 {
                return Ok(0);
            }
            total *= c;
        }
        Ok(total)
    }

    fn first_solution(&self, problem: &Problem<'_>) -> Result<Option<Vec<u64>>> {
        let mut prep = Prepared::new(problem)?;
        if !prep.feasible {
            return Ok(None);
        }
        let mut values = vec![0u64; problem.slots()];
        for component in prep.components.clone() {
            // natural slot order makes the first feasible walk lexicographically least
            let mut search = prep.search(&component, component.clone());
            for depth in 0..component.len() {
                let slot = component[depth];
                let n = search.prepared.classes[&slot].reps.len();
                let mut found = false;
                for c in 0..n {
                    search.assigned[slot] = c;
                    if search.admissible(depth) && search.count_from(depth + 1)? > 0 {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(None);
                }
                values[slot] = search.slot(slot);
            }
            let used = search.steps;
            prep.steps += used;
        }
        Ok(Some(values))
    }
}
