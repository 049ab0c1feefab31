//! The condition poset: finite formula sets with exact density certificates,
//! their order, and the three refinement moves (split to the next level,
//! force a disagreement bit, avoid a target set).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::BinaryString;
use crate::count::{Counter, Problem, DEFAULT_BUDGET};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::formula::{Formula, Rel, Term};
use crate::model::{CodedPrefix, MiniModel};

/// A model together with the counting strategy and enumeration budget used
/// for every certificate.
#[derive(Clone)]
pub struct Lab {
    model: MiniModel,
    counter: Arc<dyn Counter>,
    budget: u64,
}

impl fmt::Debug for Lab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lab")
            .field("width", &self.model.width())
            .field("counter", &self.counter.name())
            .field("budget", &self.budget)
            .finish()
    }
}

impl Lab {
    pub fn new(model: MiniModel, counter: Arc<dyn Counter>) -> Self {
        Self {
            model,
            counter,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn model(&self) -> &MiniModel {
        &self.model
    }

    pub fn counter(&self) -> &dyn Counter {
        self.counter.as_ref()
    }

    pub fn counter_arc(&self) -> Arc<dyn Counter> {
        Arc::clone(&self.counter)
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn width(&self) -> u32 {
        self.model.width()
    }

    /// `(2^a)^(2^level)`.
    pub fn total(&self, level: u32) -> Result<u128> {
        Ok(Problem::new(&self.model, level, &[], self.budget)?.total())
    }

    /// `|p(N)|` for an arbitrary formula set at `level`.
    pub fn count<'f, I>(&self, level: u32, formulas: I) -> Result<u128>
    where
        I: IntoIterator<Item = &'f Formula>,
    {
        let fs: Vec<Formula> = formulas.into_iter().cloned().collect();
        let p = Problem::new(&self.model, level, &fs, self.budget)?;
        self.counter.count(&p)
    }

    pub fn first_solution<'f, I>(&self, level: u32, formulas: I) -> Result<Option<Vec<u64>>>
    where
        I: IntoIterator<Item = &'f Formula>,
    {
        let fs: Vec<Formula> = formulas.into_iter().cloned().collect();
        let p = Problem::new(&self.model, level, &fs, self.budget)?;
        self.counter.first_solution(&p)
    }
}

/// A finitely realizable formula set at level `n_p`, with its exact
/// realization count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    level: u32,
    formulas: BTreeSet<Formula>,
    count: u128,
    total: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaTag {
    Extend,
    Disagree,
    Avoid,
}

/// The formula slots a refinement talks about: `target` is the `σ` whose
/// bits must differ (absent for avoidance), `args` the arguments of `F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BinaryString>,
    pub args: Vec<BinaryString>,
}

/// Everything needed to re-check one refinement step by recounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementCertificate {
    pub lemma: LemmaTag,
    /// Level of the refined condition.
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Pattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit: Option<u32>,
    /// Disagreement: per-bit count of realizations where the bits differ.
    /// Avoidance: per-bit count of realizations where bit `i` of `F` is 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profile: Vec<u128>,
    /// The majority profile `h` (avoidance only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majority: Option<BinaryString>,
    /// The avoided target `g` (avoidance only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avoided: Option<BinaryString>,
    pub before: u128,
    pub after: u128,
    /// `(2^a)^(2^level)` at the refined level.
    pub total: u128,
    /// Formulas added, as text. For a split, the whole new formula set.
    pub added: Vec<String>,
}

impl RefinementCertificate {
    /// `|q(N)| ≥ (|p(N)| − 2^−m (2^a)^(2^n)) / m`.
    pub fn disagreement_bound_holds(&self, m: u32) -> bool {
        assert!(m >= 1);
        let slack = self.total >> m;
        if self.before <= slack {
            return true;
        }
        self.after >= (self.before - slack).div_ceil(m as u128)
    }

    /// `|q(N)| ≥ |p(N)| / 2`.
    pub fn halving_bound_holds(&self) -> bool {
        self.after * 2 >= self.before
    }
}

impl Condition {
    /// Checks that `formulas` form a condition at `level`: computes the
    /// exact count and fails with [`Error::EmptyCondition`] when it is zero.
    pub fn new<I>(lab: &Lab, formulas: I, level: u32) -> Result<Condition>
    where
        I: IntoIterator<Item = Formula>,
    {
        let formulas: BTreeSet<Formula> = formulas.into_iter().map(|f| f.canonical()).collect();
        let p = Problem::new(lab.model(), level, &formulas.iter().cloned().collect::<Vec<_>>(), lab.budget)?;
        let total = p.total();
        let count = lab.counter.count(&p)?;
        if count == 0 {
            return Err(Error::EmptyCondition);
        }
        Ok(Condition {
            level,
            formulas,
            count,
            total,
        })
    }

    /// The empty condition at level 0.
    pub fn seed(lab: &Lab) -> Result<Condition> {
        Condition::new(lab, [], 0)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn formulas(&self) -> &BTreeSet<Formula> {
        &self.formulas
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn density(&self) -> Density {
        Density::new(self.count, self.total)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(&f.canonical())
    }

    /// `self ≤ p`: `self` is at least as deep and contains every
    /// ramification of every formula of `p` to its own level.
    pub fn leq(&self, p: &Condition) -> bool {
        if self.level < p.level {
            return false;
        }
        p.formulas.iter().all(|phi| {
            phi.ramifications(p.level as usize, self.level as usize)
                .map(|rs| rs.iter().all(|psi| self.formulas.contains(&psi.canonical())))
                .unwrap_or(false)
        })
    }

    /// The lexicographically least realization, `b_τ` for `τ ∈ 2^n` in
    /// label order.
    pub fn realization(&self, lab: &Lab) -> Result<Vec<u64>> {
        lab.first_solution(self.level, &self.formulas)?
            .ok_or_else(|| Error::Realizability("condition has a positive count but no realization".into()))
    }

    fn with_formula(&self, f: Formula, count: u128) -> Condition {
        let mut formulas = self.formulas.clone();
        formulas.insert(f.canonical());
        Condition {
            level: self.level,
            formulas,
            count,
            total: self.total,
        }
    }

    fn check_label(&self, s: &BinaryString) -> Result<()> {
        if s.len() != self.level as usize {
            return Err(Error::Pattern(format!(
                "label {s:?} does not have length {}",
                self.level
            )));
        }
        Ok(())
    }

    fn apply_term(&self, lab: &Lab, function: &str, args: &[BinaryString]) -> Result<Term> {
        for s in args {
            self.check_label(s)?;
        }
        lab.model().resolve(function, args.len())?;
        Ok(Term::apply(function, args.iter().cloned().map(Term::Var).collect()))
    }

    /// Counts `self ∪ {extra_i}` for every bit `i < a`, in parallel.
    fn bit_profile<F>(&self, lab: &Lab, extra: F) -> Result<Vec<u128>>
    where
        F: Fn(u32) -> Formula + Sync,
    {
        (0..lab.width())
            .into_par_iter()
            .map(|i| {
                let f = extra(i);
                lab.count(self.level, self.formulas.iter().chain(std::iter::once(&f)))
            })
            .collect()
    }

    /// The set of all `(n_p + 1)`-ramifications of the formulas of `self`.
    /// The diagonal `b_{σ0} = b_{σ1} = b_σ` embeds `p(N)` into the result, so
    /// its count is never smaller.
    pub fn extend_split(&self, lab: &Lab) -> Result<(Condition, RefinementCertificate)> {
        let n = self.level as usize;
        let mut formulas = BTreeSet::new();
        for phi in &self.formulas {
            for psi in phi.ramifications(n, n + 1)? {
                formulas.insert(psi.canonical());
            }
        }
        let q = Condition::new(lab, formulas, self.level + 1)?;
        let cert = RefinementCertificate {
            lemma: LemmaTag::Extend,
            level: q.level,
            pattern: None,
            bit: None,
            profile: Vec::new(),
            majority: None,
            avoided: None,
            before: self.count,
            after: q.count,
            total: q.total,
            added: q.formulas.iter().map(ToString::to_string).collect(),
        };
        Ok((q, cert))
    }

    /// Adds `(x_σ)_i ≠ (F(x_σ1, …, x_σk))_i` for the bit `i < a` that keeps
    /// the most realizations (least such `i` on ties).
    pub fn force_disagreement(
        &self,
        lab: &Lab,
        target: &BinaryString,
        function: &str,
        args: &[BinaryString],
    ) -> Result<(Condition, RefinementCertificate)> {
        self.check_label(target)?;
        if args.contains(target) {
            return Err(Error::Pattern(format!(
                "target x[{target}] must differ from every argument"
            )));
        }
        let image = self.apply_term(lab, function, args)?;
        let atom = |i: u32| Formula::atom(Term::Var(target.clone()).bit(i), Rel::Ne, image.clone().bit(i));
        let profile = self.bit_profile(lab, atom)?;

        let best = profile.iter().copied().max().unwrap_or(0);
        if best == 0 {
            return Err(Error::DisagreementImpossible {
                target: target.clone(),
                function: function.to_string(),
                args: args.to_vec(),
            });
        }
        let i = profile.iter().position(|&c| c == best).unwrap() as u32;
        let added = atom(i);
        let q = self.with_formula(added.clone(), best);
        let cert = RefinementCertificate {
            lemma: LemmaTag::Disagree,
            level: self.level,
            pattern: Some(Pattern {
                function: function.to_string(),
                target: Some(target.clone()),
                args: args.to_vec(),
            }),
            bit: Some(i),
            profile,
            majority: None,
            avoided: None,
            before: self.count,
            after: best,
            total: self.total,
            added: vec![added.to_string()],
        };
        Ok((q, cert))
    }

    /// Per-bit majority value of `F(x_σ1, …, x_σk)` over the realizations:
    /// `h(i)` is the least `j < 2` taken by at least half of them. Also
    /// returns, per bit, how many realizations have that bit set.
    pub fn majority_profile(
        &self,
        lab: &Lab,
        function: &str,
        args: &[BinaryString],
    ) -> Result<(CodedPrefix, Vec<u128>)> {
        let image = self.apply_term(lab, function, args)?;
        let ones = self.bit_profile(lab, |i| Formula::atom(image.clone().bit(i), Rel::Eq, Term::Lit(1)))?;
        let h = ones
            .iter()
            .map(|&one| 2 * (self.count - one) < self.count)
            .collect::<Vec<bool>>();
        Ok((BinaryString::from_bits(h), ones))
    }

    /// Adds `(F(x_σ1, …, x_σk))_i ≠ g(i)` at the least bit where `g`
    /// disagrees with the majority profile, removing a minority.
    pub fn force_avoidance(
        &self,
        lab: &Lab,
        avoided: &CodedPrefix,
        function: &str,
        args: &[BinaryString],
    ) -> Result<(Condition, RefinementCertificate)> {
        if avoided.len() != lab.width() as usize {
            return Err(Error::LengthMismatch(avoided.len(), lab.width() as usize));
        }
        let (h, ones) = self.majority_profile(lab, function, args)?;
        let Some(i) = (0..avoided.len()).find(|&i| avoided.bit(i) != h.bit(i)) else {
            return Err(Error::AvoidanceImpossible {
                target: avoided.clone(),
                function: function.to_string(),
                args: args.to_vec(),
            });
        };
        let g_i = avoided.bit(i).unwrap();
        let image = self.apply_term(lab, function, args)?;
        let added = Formula::atom(image.bit(i as u32), Rel::Ne, Term::Lit(g_i as u64));
        // survivors are exactly those whose bit equals h(i)
        let after = if g_i { self.count - ones[i] } else { ones[i] };
        let q = self.with_formula(added.clone(), after);
        let cert = RefinementCertificate {
            lemma: LemmaTag::Avoid,
            level: self.level,
            pattern: Some(Pattern {
                function: function.to_string(),
                target: None,
                args: args.to_vec(),
            }),
            bit: Some(i as u32),
            profile: ones,
            majority: Some(h),
            avoided: Some(avoided.clone()),
            before: self.count,
            after,
            total: self.total,
            added: vec![added.to_string()],
        };
        Ok((q, cert))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::{Compressed, Exhaustive};

    fn lab(a: u32) -> Lab {
        Lab::new(MiniModel::new(a).unwrap(), Arc::new(Exhaustive))
    }

    fn lab_with(a: u32, lib: &str) -> Lab {
        Lab::new(MiniModel::with_library(a, lib).unwrap(), Arc::new(Exhaustive))
    }

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn is_condition_examples() {
        let l = lab(2);
        assert_eq!(Condition::new(&l, [], 0).unwrap().density(), Density::new(1, 1));
        assert_eq!(
            Condition::new(&l, [f("(x[])#0 = 1")], 0).unwrap().density(),
            Density::new(1, 2)
        );
        assert_eq!(
            Condition::new(&l, [f("(x[])#0 = 1"), f("(x[])#0 = 0")], 0),
            Err(Error::EmptyCondition)
        );
    }

    #[test]
    fn leq_examples() {
        let l = lab(2);
        let p = Condition::new(&l, [f("(x[])#0 = 1")], 0).unwrap();
        assert!(p.leq(&p));
        let (q, _) = p.extend_split(&l).unwrap();
        assert!(q.leq(&p));
        assert!(!p.leq(&q));
        let partial = Condition::new(&l, [f("(x[0])#0 = 1")], 1).unwrap();
        assert!(!partial.leq(&p));
    }

    #[test]
    fn extend_split_examples() {
        let l = lab(2);
        let (q, cert) = Condition::seed(&l).unwrap().extend_split(&l).unwrap();
        assert_eq!((q.level(), q.count()), (1, 16));
        assert_eq!(cert.before, 4);

        let p = Condition::new(&l, [f("(x[])#0 = 1")], 0).unwrap();
        assert_eq!(p.count(), 2);
        let (q, _) = p.extend_split(&l).unwrap();
        assert_eq!(q.count(), 4);
        let expected: BTreeSet<Formula> = [f("(x[0])#0 = 1"), f("(x[1])#0 = 1")].into_iter().collect();
        assert_eq!(q.formulas(), &expected);

        // single-variable product condition: density squares
        let l3 = lab(3);
        let p = Condition::new(&l3, [f("x[] < 3")], 0).unwrap();
        let (q, _) = p.extend_split(&l3).unwrap();
        let d = p.density();
        assert_eq!(q.density(), Density::new(d.num * d.num, d.den * d.den));
    }

    #[test]
    fn disagreement_example() {
        let l = lab(2);
        let (p, _) = Condition::seed(&l).unwrap().extend_split(&l).unwrap();
        let (q, cert) = p.force_disagreement(&l, &bs("0"), "f0", &[bs("1")]).unwrap();
        assert_eq!(cert.bit, Some(0));
        assert_eq!(cert.after, 8);
        assert!(q.contains(&f("(x[0])#0 != (x[1])#0")));
        assert!(q.leq(&p));
        assert_eq!(q.level(), p.level());
        // brute-force recount of the recorded after-count
        assert_eq!(l.count(1, q.formulas()).unwrap(), 8);
        for m in 1..=2 {
            assert!(cert.disagreement_bound_holds(m));
        }
    }

    #[test]
    fn disagreement_impossible_when_bit_is_forced() {
        let l = lab_with(1, "one/1 = 1");
        let p = Condition::new(&l, [f("(x[0])#0 = 1")], 1).unwrap();
        let err = p.force_disagreement(&l, &bs("0"), "one", &[bs("1")]).unwrap_err();
        assert!(matches!(err, Error::DisagreementImpossible { .. }));
    }

    #[test]
    fn disagreement_rejects_bad_patterns() {
        let l = lab(2);
        let (p, _) = Condition::seed(&l).unwrap().extend_split(&l).unwrap();
        assert!(matches!(
            p.force_disagreement(&l, &bs("0"), "f0", &[bs("0")]),
            Err(Error::Pattern(_))
        ));
        assert!(matches!(
            p.force_disagreement(&l, &bs("00"), "f0", &[bs("1")]),
            Err(Error::Pattern(_))
        ));
        assert!(matches!(
            p.force_disagreement(&l, &bs("0"), "g", &[bs("1")]),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    fn avoidance_example() {
        let l = lab(2);
        let p = Condition::seed(&l).unwrap();
        let (h, _) = p.majority_profile(&l, "f0", &[bs("")]).unwrap();
        assert_eq!(h, bs("00"));
        let (q, cert) = p.force_avoidance(&l, &bs("11"), "f0", &[bs("")]).unwrap();
        assert_eq!(cert.bit, Some(0));
        assert_eq!((cert.before, cert.after), (4, 2));
        assert!(q.contains(&f("(x[])#0 != 1")));
        // survivors are {0, 2}
        assert_eq!(l.first_solution(0, q.formulas()).unwrap(), Some(vec![0]));
        assert_eq!(l.count(0, q.formulas()).unwrap(), 2);
        assert!(matches!(
            p.force_avoidance(&l, &bs("00"), "f0", &[bs("")]),
            Err(Error::AvoidanceImpossible { .. })
        ));
        assert!(matches!(
            p.force_avoidance(&l, &bs("1"), "f0", &[bs("")]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn counters_give_identical_conditions() {
        let m = MiniModel::with_library(3, "succ/1 = a1 + 1").unwrap();
        let a = Lab::new(m.clone(), Arc::new(Exhaustive));
        let b = Lab::new(m, Arc::new(Compressed));
        let run = |l: &Lab| {
            let (p, _) = Condition::seed(l).unwrap().extend_split(l).unwrap();
            let (p, c1) = p.force_disagreement(l, &bs("0"), "succ", &[bs("1")]).unwrap();
            let (p, c2) = p.force_avoidance(l, &bs("101"), "succ", &[bs("1")]).unwrap();
            (p, c1, c2)
        };
        assert_eq!(run(&a), run(&b));
    }
}
