//! Descending sequences of conditions built from a requirement schedule,
//! the generic fragment they determine, and the coded-set families read off
//! its least realization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binary::BinaryString;
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula};
use crate::model::CodedPrefix;
use crate::poset::{Condition, Lab, LemmaTag, RefinementCertificate};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Requirement {
    Extend,
    Disagree { function: String },
    Avoid { target: CodedPrefix, function: String },
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Extend => write!(f, "extend"),
            Requirement::Disagree { function } => write!(f, "disagree {function}"),
            Requirement::Avoid { target, function } => write!(f, "avoid {target} {function}"),
        }
    }
}

impl FromStr for Requirement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["extend"] => Ok(Requirement::Extend),
            ["disagree", f] => Ok(Requirement::Disagree {
                function: f.to_string(),
            }),
            ["avoid", g, f] => Ok(Requirement::Avoid {
                target: g.parse()?,
                function: f.to_string(),
            }),
            _ => Err(Error::Pattern(format!(
                "cannot read requirement {s:?}; expected `extend`, `disagree F` or `avoid G F`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub condition: Condition,
    /// Absent for the seed.
    pub certificate: Option<RefinementCertificate>,
    /// The requirement served, or `None` for the seed and for inserted
    /// extensions.
    pub requirement: Option<usize>,
}

/// The steps spent on one requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub requirement: usize,
    /// Range of step indices, end exclusive.
    pub steps: (usize, usize),
    pub level: u32,
    /// One more than the largest bit chosen in the batch; every pattern's
    /// bound holds with this `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_bound: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct DescendingSequence {
    pub n_final: u32,
    pub requirements: Vec<Requirement>,
    pub steps: Vec<Step>,
    pub batches: Vec<Batch>,
}

impl DescendingSequence {
    pub fn last(&self) -> &Condition {
        &self.steps.last().expect("sequences start with the seed").condition
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.steps.iter().map(|s| &s.condition)
    }

    pub fn certificates(&self) -> impl Iterator<Item = &RefinementCertificate> {
        self.steps.iter().filter_map(|s| s.certificate.as_ref())
    }

    pub fn is_chain(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].condition.leq(&w[0].condition))
    }

    pub fn levels_monotone(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[0].condition.level() <= w[1].condition.level())
    }

    /// Every certificate's bound, with the batch-uniform `m` for disagreement.
    pub fn bounds_hold(&self) -> bool {
        self.batches.iter().all(|b| {
            self.steps[b.steps.0..b.steps.1].iter().all(|s| {
                let Some(c) = &s.certificate else { return true };
                match c.lemma {
                    LemmaTag::Extend => c.after >= c.before,
                    LemmaTag::Avoid => c.halving_bound_holds(),
                    LemmaTag::Disagree => (1..=b.uniform_bound.unwrap_or(1)).all(|m| c.disagreement_bound_holds(m)),
                }
            })
        })
    }
}

fn labels(level: u32) -> impl Iterator<Item = BinaryString> {
    BinaryString::all_of_length(level)
}

/// Tuples from `pool^k` in lexicographic order.
fn tuples(pool: &[BinaryString], k: usize) -> Vec<Vec<BinaryString>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |s| {
                    let mut t = t.clone();
                    t.push(s.clone());
                    t
                })
            })
            .collect();
    }
    out
}

struct Builder<'l> {
    lab: &'l Lab,
    steps: Vec<Step>,
    batches: Vec<Batch>,
}

impl Builder<'_> {
    fn current(&self) -> &Condition {
        &self.steps.last().unwrap().condition
    }

    fn push(&mut self, (condition, cert): (Condition, RefinementCertificate), requirement: Option<usize>) {
        self.steps.push(Step {
            condition,
            certificate: Some(cert),
            requirement,
        });
    }

    fn extend(&mut self, requirement: Option<usize>) -> Result<()> {
        let next = self.current().extend_split(self.lab)?;
        self.push(next, requirement);
        Ok(())
    }

    fn disagree(&mut self, j: usize, function: &str) -> Result<()> {
        let level = self.current().level();
        let k = self.lab.model().function(function)?.arity;
        for sigma in labels(level) {
            let pool: Vec<BinaryString> = labels(level).filter(|t| *t != sigma).collect();
            for args in tuples(&pool, k) {
                let next = self.current().force_disagreement(self.lab, &sigma, function, &args)?;
                self.push(next, Some(j));
            }
        }
        Ok(())
    }

    fn avoid(&mut self, j: usize, target: &CodedPrefix, function: &str) -> Result<()> {
        let level = self.current().level();
        let k = self.lab.model().function(function)?.arity;
        let pool: Vec<BinaryString> = labels(level).collect();
        for args in tuples(&pool, k) {
            let next = self.current().force_avoidance(self.lab, target, function, &args)?;
            self.push(next, Some(j));
        }
        Ok(())
    }
}

/// Serves `reqs` in order from the seed. Before each disagreement or
/// avoidance batch the level is raised by one unless the explicit
/// extensions still to come reach `n_final` on their own. The sequence is
/// extended to `n_final` at the end.
pub fn run_schedule(lab: &Lab, reqs: &[Requirement], n_final: u32) -> Result<DescendingSequence> {
    for r in reqs {
        match r {
            Requirement::Extend => {}
            Requirement::Disagree { function } => {
                lab.model().function(function)?;
            }
            Requirement::Avoid { target, function } => {
                lab.model().function(function)?;
                if target.len() != lab.width() as usize {
                    return Err(Error::LengthMismatch(target.len(), lab.width() as usize));
                }
            }
        }
    }
    let explicit = reqs.iter().filter(|r| **r == Requirement::Extend).count();
    if explicit > n_final as usize {
        return Err(Error::Pattern(format!(
            "{explicit} explicit extensions pass the final level {n_final}"
        )));
    }

    let mut b = Builder {
        lab,
        steps: vec![Step {
            condition: Condition::seed(lab)?,
            certificate: None,
            requirement: None,
        }],
        batches: Vec::new(),
    };
    let mut pending = explicit as u32;
    for (j, r) in reqs.iter().enumerate() {
        if *r == Requirement::Extend {
            pending -= 1;
        } else if b.current().level() + pending < n_final {
            b.extend(None)?;
        }
        let start = b.steps.len();
        match r {
            Requirement::Extend => {
                if b.current().level() >= n_final {
                    return Err(Error::Pattern(format!(
                        "requirement {j} would extend past the final level {n_final}"
                    )));
                }
                b.extend(Some(j))?;
            }
            Requirement::Disagree { function } => b.disagree(j, function)?,
            Requirement::Avoid { target, function } => b.avoid(j, target, function)?,
        }
        let uniform_bound = match r {
            Requirement::Disagree { .. } => b.steps[start..]
                .iter()
                .filter_map(|s| s.certificate.as_ref()?.bit)
                .max()
                .map(|i| i + 1),
            _ => None,
        };
        b.batches.push(Batch {
            requirement: j,
            steps: (start, b.steps.len()),
            level: b.current().level(),
            uniform_bound,
        });
    }
    while b.current().level() < n_final {
        b.extend(None)?;
    }
    Ok(DescendingSequence {
        n_final,
        requirements: reqs.to_vec(),
        steps: b.steps,
        batches: b.batches,
    })
}

/// Pushes a level-`n` realization down to level `m ≤ n` along `τ ↦ τ·0…0`.
fn push_down(values: &[u64], n: u32, m: u32) -> Vec<u64> {
    (0..1usize << m).map(|i| values[i << (n - m)]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCheck {
    pub step: usize,
    pub level: u32,
    pub formulas: usize,
    pub realized: bool,
}

/// The formulas at level `n_final` whose reducts lie along the sequence,
/// together with a realization that witnesses their joint satisfiability.
#[derive(Debug, Clone)]
pub struct GenericFragment {
    pub level: u32,
    pub formulas: BTreeSet<Formula>,
    pub realization: Vec<u64>,
    pub steps: Vec<StepCheck>,
}

impl GenericFragment {
    /// Every formula of `p` is the reduct of some fragment formula.
    pub fn recovers(&self, p: &Condition) -> bool {
        let reducts: BTreeSet<Formula> = self
            .formulas
            .iter()
            .filter_map(|f| f.reduct(p.level() as usize).ok())
            .map(|f| f.canonical())
            .collect();
        p.formulas().iter().all(|f| reducts.contains(f))
    }
}

/// Lifts every condition of the sequence to `n_final` and checks that the
/// least realization of the last condition satisfies the lifted set, and
/// that its push-down to each earlier level realizes that condition.
pub fn check_generic_fragment(seq: &DescendingSequence, lab: &Lab) -> Result<GenericFragment> {
    let last = seq.last();
    let n = last.level();
    let mut formulas = BTreeSet::new();
    for p in seq.conditions() {
        for phi in p.formulas() {
            for psi in phi.ramifications(p.level() as usize, n as usize)? {
                formulas.insert(psi.canonical());
            }
        }
    }
    let realization = last.realization(lab)?;
    let asg = Assignment::from_slots(n, &realization);
    for f in &formulas {
        if !f.eval(&asg, lab.model())? {
            return Err(Error::Realizability(format!("fragment formula {f} fails on the realization")));
        }
    }
    let mut steps = Vec::new();
    for (i, p) in seq.conditions().enumerate() {
        let m = p.level();
        let local = Assignment::from_slots(m, &push_down(&realization, n, m));
        let mut realized = true;
        for f in p.formulas() {
            realized &= f.eval(&local, lab.model())?;
        }
        if !realized {
            return Err(Error::Realizability(format!("step {i} is not realized by the push-down")));
        }
        steps.push(StepCheck {
            step: i,
            level: m,
            formulas: p.formulas().len(),
            realized,
        });
    }
    Ok(GenericFragment {
        level: n,
        formulas,
        realization,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelData {
    pub label: BinaryString,
    pub value: u64,
    pub coded: CodedPrefix,
    pub orbit: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessSource {
    Certificate,
    Observed,
}

/// Two labels whose coded prefixes differ at `bit`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub left: BinaryString,
    pub right: BinaryString,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<WitnessSource>,
}

/// `(b_σ)_bit ≠ (F(b_τ1, …, b_τk))_bit`, forced by a disagreement step at
/// `level` on the reducts of these labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub target: BinaryString,
    pub function: String,
    pub args: Vec<BinaryString>,
    pub bit: u32,
    pub level: u32,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySeparation {
    pub left: usize,
    pub right: usize,
    /// `X ⊆ Y`: nothing to separate.
    pub contained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BinaryString>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<SeparationWitness>,
}

impl FamilySeparation {
    pub fn separated(&self) -> bool {
        self.contained || (self.target.is_some() && self.witnesses.iter().all(|w| w.holds))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidanceWitness {
    pub target: CodedPrefix,
    pub function: String,
    pub args: Vec<BinaryString>,
    pub bit: u32,
    pub value: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub level: u32,
    pub labels: Vec<LabelData>,
    pub pairs: Vec<PairWitness>,
    pub families: Vec<Vec<BinaryString>>,
    pub separations: Vec<FamilySeparation>,
    pub avoidance: Vec<AvoidanceWitness>,
    /// Every formula of the last condition holds on the realization.
    pub final_formulas_hold: bool,
}

impl FamilyReport {
    pub fn prefixes_distinct(&self) -> bool {
        self.pairs.iter().all(|p| p.bit.is_some())
    }
}

/// Disagreement certificates indexed by pattern, for lookup by reduct.
struct CertIndex<'s> {
    disagree: BTreeMap<(String, BinaryString, Vec<BinaryString>), &'s RefinementCertificate>,
    levels: BTreeSet<u32>,
}

impl<'s> CertIndex<'s> {
    fn new(seq: &'s DescendingSequence) -> Self {
        let mut disagree = BTreeMap::new();
        let mut levels = BTreeSet::new();
        for c in seq.certificates() {
            if let (LemmaTag::Disagree, Some(p)) = (c.lemma, &c.pattern) {
                let target = p.target.clone().expect("disagreement patterns carry a target");
                disagree.entry((p.function.clone(), target, p.args.clone())).or_insert(c);
                levels.insert(c.level);
            }
        }
        Self { disagree, levels }
    }

    /// A certificate whose pattern is the reduct of `(F, σ, τ⃗)`, deepest first.
    fn find(&self, function: &str, target: &BinaryString, args: &[BinaryString]) -> Option<&'s RefinementCertificate> {
        self.levels.iter().rev().find_map(|&l| {
            let l = l as usize;
            let key = (
                function.to_string(),
                target.prefix(l).ok()?,
                args.iter().map(|a| a.prefix(l)).collect::<Result<Vec<_>>>().ok()?,
            );
            self.disagree.get(&key).copied()
        })
    }
}

struct Extractor<'a> {
    lab: &'a Lab,
    index: CertIndex<'a>,
    values: BTreeMap<BinaryString, u64>,
}

impl Extractor<'_> {
    fn separation(&self, target: &BinaryString, function: &str, args: &[BinaryString]) -> Result<Option<SeparationWitness>> {
        let Some(cert) = self.index.find(function, target, args) else {
            return Ok(None);
        };
        let bit = cert.bit.expect("disagreement certificates record a bit");
        let m = self.lab.model();
        let argv: Vec<u64> = args.iter().map(|a| self.values[a]).collect();
        let image = m.apply(function, &argv)?;
        let holds = m.bit(self.values[target], bit) != m.bit(image, bit);
        Ok(Some(SeparationWitness {
            target: target.clone(),
            function: function.to_string(),
            args: args.to_vec(),
            bit,
            level: cert.level,
            holds,
        }))
    }

    /// Witnesses that `σ` is separated from every tuple over `pool`, for
    /// each scheduled disagreement function; `None` if any is missing.
    fn separate(&self, target: &BinaryString, pool: &[BinaryString], functions: &[&str]) -> Result<Option<Vec<SeparationWitness>>> {
        let mut out = Vec::new();
        for f in functions {
            let k = self.lab.model().function(f)?.arity;
            for args in tuples(pool, k) {
                match self.separation(target, f, &args)? {
                    Some(w) => out.push(w),
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(out))
    }
}

/// Reads the coded-set data off the least realization of the last condition
/// and checks the separation and avoidance facts the sequence forced.
pub fn realize_and_extract(seq: &DescendingSequence, lab: &Lab, families: &[Vec<BinaryString>]) -> Result<FamilyReport> {
    let last = seq.last();
    let n = last.level();
    let model = lab.model();
    let a = lab.width() as usize;
    for s in families.iter().flatten() {
        if s.len() != n as usize {
            return Err(Error::Pattern(format!("family label {s:?} does not have length {n}")));
        }
    }
    let realization = last.realization(lab)?;
    let values: BTreeMap<BinaryString, u64> = labels(n).zip(realization.iter().copied()).collect();
    let asg = Assignment::from_slots(n, &realization);
    let mut final_formulas_hold = true;
    for f in last.formulas() {
        final_formulas_hold &= f.eval(&asg, model)?;
    }

    let label_data = values
        .iter()
        .map(|(s, &v)| {
            Ok(LabelData {
                label: s.clone(),
                value: v,
                coded: model.decode_prefix(v, a)?,
                orbit: model.skolem_orbit(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ex = Extractor {
        lab,
        index: CertIndex::new(seq),
        values,
    };

    let mut pairs = Vec::new();
    for (i, s) in label_data.iter().enumerate() {
        for t in &label_data[i + 1..] {
            let certified = [(&s.label, &t.label), (&t.label, &s.label)].into_iter().find_map(|(x, y)| {
                let w = ex.separation(x, crate::model::IDENTITY, std::slice::from_ref(y)).ok()??;
                w.holds.then_some(w.bit)
            });
            let (bit, source) = match certified {
                Some(b) => (Some(b), Some(WitnessSource::Certificate)),
                None => match (0..a).find(|&i| s.coded.bit(i) != t.coded.bit(i)) {
                    Some(b) => (Some(b as u32), Some(WitnessSource::Observed)),
                    None => (None, None),
                },
            };
            pairs.push(PairWitness {
                left: s.label.clone(),
                right: t.label.clone(),
                bit,
                source,
            });
        }
    }

    let disagree_fns: Vec<&str> = seq
        .requirements
        .iter()
        .filter_map(|r| match r {
            Requirement::Disagree { function } => Some(function.as_str()),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut separations = Vec::new();
    for (i, x) in families.iter().enumerate() {
        for (j, y) in families.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut sep = FamilySeparation {
                left: i,
                right: j,
                contained: x.iter().all(|s| y.contains(s)),
                target: None,
                witnesses: Vec::new(),
            };
            if !sep.contained && !disagree_fns.is_empty() {
                for s in x.iter().filter(|s| !y.contains(s)) {
                    if let Some(ws) = ex.separate(s, y, &disagree_fns)? {
                        if ws.iter().all(|w| w.holds) {
                            sep.target = Some(s.clone());
                            sep.witnesses = ws;
                            break;
                        }
                    }
                }
            }
            separations.push(sep);
        }
    }

    let mut avoidance = Vec::new();
    for c in seq.certificates().filter(|c| c.lemma == LemmaTag::Avoid) {
        let p = c.pattern.as_ref().expect("avoidance certificates carry a pattern");
        let g = c.avoided.as_ref().expect("avoidance certificates carry a target");
        let bit = c.bit.expect("avoidance certificates record a bit");
        let pool: Vec<BinaryString> = labels(n).collect();
        for args in tuples(&pool, p.args.len()) {
            let matches = args
                .iter()
                .zip(&p.args)
                .all(|(t, r)| r.is_prefix_of(t));
            if !matches {
                continue;
            }
            let argv: Vec<u64> = args.iter().map(|s| ex.values[s]).collect();
            let value = model.bit(model.apply(&p.function, &argv)?, bit) == 1;
            avoidance.push(AvoidanceWitness {
                target: g.clone(),
                function: p.function.clone(),
                args,
                bit,
                value,
                holds: Some(value) != g.bit(bit as usize),
            });
        }
    }

    Ok(FamilyReport {
        level: n,
        labels: label_data,
        pairs,
        families: families.to_vec(),
        separations,
        avoidance,
        final_formulas_hold,
    })
}

/// Whether `σ` is separated from every tuple over `pool`, using the
/// certificates of `seq` and re-evaluating on `report`'s realization.
pub fn separated_from(
    seq: &DescendingSequence,
    lab: &Lab,
    report: &FamilyReport,
    target: &BinaryString,
    pool: &[BinaryString],
) -> Result<bool> {
    let ex = Extractor {
        lab,
        index: CertIndex::new(seq),
        values: report.labels.iter().map(|l| (l.label.clone(), l.value)).collect(),
    };
    let fns: BTreeSet<&str> = seq
        .requirements
        .iter()
        .filter_map(|r| match r {
            Requirement::Disagree { function } => Some(function.as_str()),
            _ => None,
        })
        .collect();
    let fns: Vec<&str> = fns.into_iter().collect();
    Ok(ex
        .separate(target, pool, &fns)?
        .is_some_and(|ws| ws.iter().all(|w| w.holds)))
}

/// A chain read as a filter: its members, and which member meets each
/// requirement.
#[derive(Debug, Clone)]
pub struct Filter {
    pub members: Vec<Condition>,
    /// `(requirement, member)` pairs.
    pub meets: Vec<(usize, usize)>,
}

impl Filter {
    /// Any two members have a common extension in the filter.
    pub fn is_directed(&self) -> bool {
        let n = self.members.len();
        (0..n).all(|i| {
            (i..n).all(|j| {
                self.members
                    .iter()
                    .any(|r| r.leq(&self.members[i]) && r.leq(&self.members[j]))
            })
        })
    }

    /// Everything in the filter above a member is again a member.
    pub fn is_upward_closed(&self) -> bool {
        self.members.iter().all(|q| {
            self.members
                .iter()
                .filter(|p| q.leq(p))
                .all(|p| self.members.contains(p))
        })
    }

    pub fn minimum(&self) -> Option<&Condition> {
        self.members
            .iter()
            .find(|q| self.members.iter().all(|p| q.leq(p)))
    }
}

/// Builds the sequence for `reqs` and returns its members as a filter.
pub fn filter_mode(lab: &Lab, reqs: &[Requirement], n_final: u32) -> Result<(Filter, DescendingSequence)> {
    let seq = run_schedule(lab, reqs, n_final)?;
    let mut members: Vec<Condition> = Vec::new();
    let mut member_of_step = Vec::new();
    for c in seq.conditions() {
        let idx = match members.iter().position(|m| m == c) {
            Some(i) => i,
            None => {
                members.push(c.clone());
                members.len() - 1
            }
        };
        member_of_step.push(idx);
    }
    let meets = seq
        .batches
        .iter()
        .map(|b| (b.requirement, member_of_step[b.steps.1.max(1) - 1]))
        .collect();
    Ok((Filter { members, meets }, seq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::{Compressed, Exhaustive};
    use crate::model::MiniModel;
    use std::sync::Arc;

    fn lab(a: u32, lib: &str) -> Lab {
        Lab::new(MiniModel::with_library(a, lib).unwrap(), Arc::new(Exhaustive))
    }

    fn req(s: &str) -> Requirement {
        s.parse().unwrap()
    }

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn requirement_text_round_trip() {
        for s in ["extend", "disagree succ", "avoid 1011 f0"] {
            assert_eq!(req(s).to_string(), s);
        }
        assert!("avoid f0".parse::<Requirement>().is_err());
        assert!("avoid 12 f0".parse::<Requirement>().is_err());
    }

    #[test]
    fn seed_counts() {
        for (a, n) in [(1, 2), (2, 4), (3, 8)] {
            let l = lab(a, "");
            let s = Condition::seed(&l).unwrap();
            assert_eq!((s.level(), s.count()), (0, n));
        }
    }

    #[test]
    fn schedule_of_extensions() {
        let l = lab(4, "");
        let seq = run_schedule(&l, &[req("extend"), req("extend")], 2).unwrap();
        let levels: Vec<u32> = seq.conditions().map(Condition::level).collect();
        assert_eq!(levels, vec![0, 1, 2]);
        assert!(seq.conditions().all(|c| c.count() == c.total()));
        assert!(seq.is_chain());
        assert!(matches!(
            run_schedule(&l, &[req("extend"), req("extend")], 1),
            Err(Error::Pattern(_))
        ));
    }

    #[test]
    fn schedule_with_disagreement() {
        let l = lab(4, "");
        let seq = run_schedule(&l, &[req("extend"), req("disagree f0")], 1).unwrap();
        let last = seq.last();
        assert_eq!(last.level(), 1);
        let i = seq.steps[2].certificate.as_ref().unwrap().bit.unwrap();
        let atom: Formula = format!("(x[0])#{i} != (x[1])#{i}").parse().unwrap();
        assert!(last.contains(&atom));
        // brute-force recount over all 256 pairs
        let brute = (0u64..16)
            .flat_map(|u| (0u64..16).map(move |v| (u, v)))
            .filter(|&(u, v)| (u >> i) & 1 != (v >> i) & 1)
            .count() as u128;
        assert_eq!(last.count(), brute);
        assert!(last.count() >= 256 - 128);
        assert!(seq.bounds_hold());
        assert_eq!(seq.batches[1].uniform_bound, Some(i + 1));
    }

    #[test]
    fn schedule_with_avoidance() {
        let l = lab(4, "");
        let seq = run_schedule(&l, &[req("avoid 1111 f0")], 0).unwrap();
        let last = seq.last();
        let cert = seq.steps[1].certificate.as_ref().unwrap();
        let i = cert.bit.unwrap();
        let survivors: Vec<u64> = (0..16).filter(|v| (v >> i) & 1 == 0).collect();
        assert_eq!(last.count(), survivors.len() as u128);
        assert!(cert.halving_bound_holds());
        assert!(matches!(
            run_schedule(&l, &[req("avoid 11 f0")], 0),
            Err(Error::LengthMismatch(2, 4))
        ));
        assert!(matches!(
            run_schedule(&l, &[req("disagree nope")], 1),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    fn fragment_checks() {
        let l = lab(3, "succ/1 = a1 + 1");
        let single = run_schedule(&l, &[], 0).unwrap();
        let g = check_generic_fragment(&single, &l).unwrap();
        assert_eq!(&g.formulas, single.last().formulas());

        let seq = run_schedule(&l, &[req("avoid 111 f0"), req("extend")], 1).unwrap();
        let g = check_generic_fragment(&seq, &l).unwrap();
        assert!(seq.conditions().all(|p| g.recovers(p)));

        let seq = run_schedule(&l, &[req("disagree f0"), req("disagree succ"), req("avoid 101 succ")], 2).unwrap();
        let g = check_generic_fragment(&seq, &l).unwrap();
        assert!(g.steps.iter().all(|s| s.realized));
        assert_eq!(g.level, 2);
    }

    #[test]
    fn extraction_examples() {
        let l = lab(3, "succ/1 = a1 + 1");
        let seq = run_schedule(&l, &[req("disagree f0")], 1).unwrap();
        let fam = vec![vec![bs("0")], vec![bs("1")]];
        let r = realize_and_extract(&seq, &l, &fam).unwrap();
        assert!(r.final_formulas_hold);
        assert!(r.prefixes_distinct());
        assert_eq!(r.pairs[0].source, Some(WitnessSource::Certificate));
        let sep = &r.separations[0];
        assert!(sep.separated() && !sep.contained);
        let w = &sep.witnesses[0];
        assert_eq!(
            (r.labels[0].value >> w.bit) & 1 != (r.labels[1].value >> w.bit) & 1,
            w.holds
        );

        let fam = vec![vec![bs("0")], vec![bs("0"), bs("1")]];
        let r = realize_and_extract(&seq, &l, &fam).unwrap();
        assert!(r.separations[0].contained);

        let empty = run_schedule(&l, &[], 1).unwrap();
        let r = realize_and_extract(&empty, &l, &[vec![bs("0")], vec![bs("1")]]).unwrap();
        assert!(r.separations.iter().all(|s| s.witnesses.is_empty() && s.target.is_none()));
        // the least realization of the unconstrained condition repeats 0
        assert!(!r.prefixes_distinct());
    }

    #[test]
    fn avoidance_witnesses_are_lifted() {
        let l = lab(3, "");
        let seq = run_schedule(&l, &[req("avoid 111 f0"), req("extend")], 1).unwrap();
        let r = realize_and_extract(&seq, &l, &[]).unwrap();
        // one level-0 pattern, lifted to both level-1 labels
        assert_eq!(r.avoidance.len(), 2);
        assert!(r.avoidance.iter().all(|w| w.holds));
    }

    #[test]
    fn filter_examples() {
        let l = lab(4, "");
        let (f, _) = filter_mode(&l, &[], 0).unwrap();
        assert_eq!(f.members.len(), 1);

        let (f, _) = filter_mode(&l, &[req("extend")], 1).unwrap();
        assert_eq!(f.members.len(), 2);
        assert!(f.members[1].leq(&f.members[0]));
        assert!(f.is_directed() && f.is_upward_closed());

        let (f, seq) = filter_mode(&l, &[req("disagree f0"), req("avoid 1111 f0")], 1).unwrap();
        let min = f.minimum().unwrap();
        assert_eq!(min, seq.last());
        assert!(seq.bounds_hold());
        for c in seq.certificates() {
            assert!(l.count(c.level, min.formulas()).is_ok());
        }
        let tags: BTreeSet<_> = seq.certificates().map(|c| format!("{:?}", c.lemma)).collect();
        assert!(tags.contains("Disagree") && tags.contains("Avoid"));
        assert_eq!(f.meets.len(), 2);
    }

    #[test]
    fn counters_build_identical_sequences() {
        let m = MiniModel::with_library(3, "succ/1 = a1 + 1").unwrap();
        let reqs = [req("disagree f0"), req("disagree succ"), req("avoid 111 succ")];
        let a = run_schedule(&Lab::new(m.clone(), Arc::new(Exhaustive)), &reqs, 2).unwrap();
        let b = run_schedule(&Lab::new(m, Arc::new(Compressed)), &reqs, 2).unwrap();
        let ca: Vec<_> = a.conditions().cloned().collect();
        let cb: Vec<_> = b.conditions().cloned().collect();
        assert_eq!(ca, cb);
    }
}
