//! Single refinement checks and randomized sweeps over product conditions.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scottlab_core::count::{Exhaustive, Problem};
use scottlab_core::poset::LemmaTag;
use scottlab_core::{BinaryString, Condition, Counter, Density, Error, Formula, Lab, MiniModel, RefinementCertificate};
use serde::Serialize;
use serde_json::json;

use super::{parse_label, to_value, Context, Mode, Outcome};
use crate::config::{split_list, ConfigError};
use crate::error::{at_line, CliError};
use crate::report::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaKind {
    Extend,
    Disagree,
    Avoid,
}

impl FromStr for LemmaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extend" | "3.3" => Ok(LemmaKind::Extend),
            "disagree" | "3.4" => Ok(LemmaKind::Disagree),
            "avoid" | "3.5" => Ok(LemmaKind::Avoid),
            _ => Err("expected extend, disagree or avoid".into()),
        }
    }
}

impl LemmaKind {
    fn tag(self) -> &'static str {
        match self {
            LemmaKind::Extend => "extend",
            LemmaKind::Disagree => "disagree",
            LemmaKind::Avoid => "avoid",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CaseRecord {
    a: u32,
    level: u32,
    formulas: Vec<String>,
    before: u128,
    total: u128,
    density: Density,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<BinaryString>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    args: Vec<BinaryString>,
    #[serde(skip_serializing_if = "Option::is_none")]
    avoided: Option<BinaryString>,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<RefinementCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    after_density: Option<Density>,
    checks: Vec<Check>,
}

struct Case<'l> {
    lab: &'l Lab,
    p: Condition,
}

/// Text of `F(x[σ1], …)`, with the identity written as the bare variable.
fn image_text(function: &str, args: &[BinaryString]) -> String {
    let vars: Vec<String> = args.iter().map(|s| format!("x[{s}]")).collect();
    if function == scottlab_core::model::IDENTITY && vars.len() == 1 {
        vars[0].clone()
    } else {
        format!("{function}({})", vars.join(", "))
    }
}

fn formula(text: &str) -> Formula {
    text.parse().expect("generated formula text parses")
}

impl<'l> Case<'l> {
    fn model(&self) -> &MiniModel {
        self.lab.model()
    }

    fn width(&self) -> u32 {
        self.lab.width()
    }

    /// Plain enumeration of `p ∪ extra`, or `None` when it exceeds the budget.
    fn brute(&self, level: u32, extra: &[Formula]) -> Result<Option<u128>, CliError> {
        let fs: Vec<Formula> = self.p.formulas().iter().cloned().chain(extra.iter().cloned()).collect();
        let problem = Problem::new(self.model(), level, &fs, self.lab.budget())?;
        match Exhaustive.count(&problem) {
            Ok(n) => Ok(Some(n)),
            Err(Error::BudgetExceeded { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn brute_set(&self, level: u32, fs: &[Formula]) -> Result<Option<u128>, CliError> {
        let problem = Problem::new(self.model(), level, fs, self.lab.budget())?;
        match Exhaustive.count(&problem) {
            Ok(n) => Ok(Some(n)),
            Err(Error::BudgetExceeded { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn record(&self, outcome: &'static str) -> CaseRecord {
        CaseRecord {
            a: self.width(),
            level: self.p.level(),
            formulas: self.p.formulas().iter().map(ToString::to_string).collect(),
            before: self.p.count(),
            total: self.p.total(),
            density: self.p.density(),
            function: None,
            target: None,
            args: Vec::new(),
            avoided: None,
            outcome,
            certificate: None,
            after_density: None,
            checks: Vec::new(),
        }
    }

    fn extend(&self) -> Result<CaseRecord, CliError> {
        let p = &self.p;
        let (q, cert) = p.extend_split(self.lab)?;
        let mut checks = vec![
            Check::new("leq", q.leq(p)),
            Check::new("level", q.level() == p.level() + 1),
            Check::new("count-monotone", q.count() >= p.count()),
        ];
        let lifted: Vec<Formula> = q.formulas().iter().cloned().collect();
        if let Some(n) = self.brute_set(q.level(), &lifted)? {
            checks.push(Check::new("recount", n == cert.after));
        }
        if p.formulas().iter().all(|f| f.variables().len() <= 1) {
            let d = p.density();
            let squared = Density::new(d.num * d.num, d.den * d.den);
            checks.push(Check::new("density-squared", q.density() == squared));
        }
        let mut r = self.record("refined");
        r.after_density = Some(q.density());
        r.certificate = Some(cert);
        r.checks = checks;
        Ok(r)
    }

    fn disagree(&self, function: &str, target: &BinaryString, args: &[BinaryString]) -> Result<CaseRecord, CliError> {
        let p = &self.p;
        let a = self.width();
        let image = image_text(function, args);
        let atom = |i: u32| formula(&format!("(x[{target}])#{i} != ({image})#{i}"));
        let mut r = self.record("refined");
        r.function = Some(function.to_string());
        r.target = Some(target.clone());
        r.args = args.to_vec();

        let mut checks = Vec::new();
        // agreement on the first m bits over the full space has probability exactly 2^-m
        let mut identity = true;
        for m in 1..=a {
            let agree: Vec<Formula> = (0..m)
                .map(|i| formula(&format!("(x[{target}])#{i} = ({image})#{i}")))
                .collect();
            let total = self.lab.total(p.level())?;
            identity &= self.lab.count(p.level(), &agree)? == total >> m;
        }
        checks.push(Check::new("determined-bits", identity));

        match p.force_disagreement(self.lab, target, function, args) {
            Ok((q, cert)) => {
                checks.push(Check::new("leq", q.leq(p)));
                checks.push(Check::new("level", q.level() == p.level()));
                checks.push(Check::new(
                    "bound",
                    (1..=a).all(|m| cert.disagreement_bound_holds(m)),
                ));
                let bit = cert.bit.unwrap_or(0);
                let best = cert.profile.iter().copied().max().unwrap_or(0);
                checks.push(Check::new(
                    "greedy-bit",
                    cert.after == best && cert.profile.iter().position(|&c| c == best) == Some(bit as usize),
                ));
                if let Some(n) = self.brute(p.level(), &[atom(bit)])? {
                    checks.push(Check::new("recount", n == cert.after));
                }
                r.after_density = Some(q.density());
                r.certificate = Some(cert);
            }
            Err(Error::DisagreementImpossible { .. }) => {
                r.outcome = "impossible";
                // only possible once the bound is vacuous for every m
                checks.push(Check::new("impossible-justified", p.count() <= p.total() >> a));
                let mut all_zero = true;
                for i in 0..a {
                    all_zero &= self.brute(p.level(), &[atom(i)])?.is_none_or(|n| n == 0);
                }
                checks.push(Check::new("recount", all_zero));
            }
            Err(e) => return Err(e.into()),
        }
        r.checks = checks;
        Ok(r)
    }

    fn avoid(&self, function: &str, args: &[BinaryString], g: &BinaryString) -> Result<CaseRecord, CliError> {
        let p = &self.p;
        let a = self.width();
        let image = image_text(function, args);
        let mut r = self.record("refined");
        r.function = Some(function.to_string());
        r.args = args.to_vec();
        r.avoided = Some(g.clone());

        let (h, ones) = p.majority_profile(self.lab, function, args)?;
        let mut checks = vec![Check::new("majority-defined", h.len() == a as usize)];
        let majority_ok = (0..a as usize).all(|i| {
            let zeros = p.count() - ones[i];
            h.bit(i) == Some(2 * zeros < p.count())
        });
        checks.push(Check::new("majority-profile", majority_ok));
        let mut ones_ok = true;
        for i in 0..a {
            let probe = formula(&format!("({image})#{i} = 1"));
            ones_ok &= self.brute(p.level(), &[probe])?.is_none_or(|n| n == ones[i as usize]);
        }
        checks.push(Check::new("profile-recount", ones_ok));

        match p.force_avoidance(self.lab, g, function, args) {
            Ok((q, cert)) => {
                checks.push(Check::new("impossible-iff-majority", *g != h));
                checks.push(Check::new("leq", q.leq(p)));
                checks.push(Check::new("level", q.level() == p.level()));
                checks.push(Check::new("halving", cert.halving_bound_holds()));
                let bit = cert.bit.unwrap_or(0) as usize;
                let least = (0..a as usize).find(|&i| g.bit(i) != h.bit(i));
                checks.push(Check::new("avoided-bit", least == Some(bit)));
                let g_i = g.bit(bit).unwrap_or(false) as u8;
                let added = formula(&format!("({image})#{bit} != {g_i}"));
                if let Some(n) = self.brute(p.level(), &[added])? {
                    checks.push(Check::new("recount", n == cert.after));
                }
                r.after_density = Some(q.density());
                r.certificate = Some(cert);
            }
            Err(Error::AvoidanceImpossible { .. }) => {
                r.outcome = "impossible";
                checks.push(Check::new("impossible-iff-majority", *g == h));
            }
            Err(e) => return Err(e.into()),
        }
        r.checks = checks;
        Ok(r)
    }
}

fn random_bits(rng: &mut ChaCha8Rng, len: u32) -> BinaryString {
    BinaryString::from_bits((0..len).map(|_| rng.gen()).collect())
}

/// Single-variable constraints on random slots with joint density ≥ 1/4.
fn random_product(rng: &mut ChaCha8Rng, a: u32, level: u32) -> Vec<Formula> {
    let size = 1u64 << a;
    loop {
        let (mut num, mut den) = (1u128, 1u128);
        let mut fs = Vec::new();
        for s in BinaryString::all_of_length(level) {
            let (text, n) = match rng.gen_range(0..4) {
                0 => continue,
                1 => (format!("(x[{s}])#{} = {}", rng.gen_range(0..a), rng.gen_range(0..2)), size / 2),
                2 => {
                    let k = rng.gen_range(1..=size);
                    (format!("x[{s}] < {k}"), k)
                }
                _ => {
                    let k = rng.gen_range(0..size - 1);
                    (format!("{k} < x[{s}]"), size - 1 - k)
                }
            };
            num *= n as u128;
            den *= size as u128;
            fs.push(formula(&text));
        }
        if 4 * num >= den {
            return fs;
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, pool: &[BinaryString], k: usize) -> Vec<BinaryString> {
    (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
}

fn parse_range(text: &str, line: Option<usize>) -> Result<(u32, u32), ConfigError> {
    let bad = || ConfigError::at(line, format!("invalid range {text:?}; expected `lo..hi`"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub struct LemmaCheck;

impl LemmaCheck {
    fn single(&self, ctx: &Context<'_>, kind: LemmaKind) -> Result<Vec<CaseRecord>, CliError> {
        let s = ctx.scenario;
        let lab = &ctx.lab;
        let level: u32 = s.parse_key("level")?.unwrap_or(0);
        let mut formulas = Vec::new();
        for e in s.all("formula") {
            let f: Formula = e
                .value
                .parse()
                .map_err(|err: scottlab_core::SyntaxError| ConfigError::at(e.line, err.to_string()))?;
            formulas.push(f);
        }
        let p = match Condition::new(lab, formulas, level) {
            Ok(p) => p,
            Err(Error::EmptyCondition) => {
                return Err(ConfigError::at(s.line_of("formula"), "the condition has no realization").into())
            }
            Err(e) => return Err(at_line(s.line_of("formula"))(e)),
        };
        let case = Case { lab, p };
        if kind == LemmaKind::Extend {
            return Ok(vec![case.extend()?]);
        }
        let function = s.get("function").unwrap_or(scottlab_core::model::IDENTITY);
        let fline = s.line_of("function");
        let k = lab.model().function(function).map_err(at_line(fline))?.arity;
        let labels = |key: &str, default: BinaryString| -> Result<Vec<BinaryString>, ConfigError> {
            match s.entry(key) {
                Some(e) => split_list(&e.value)
                    .into_iter()
                    .map(|t| parse_label(t, level, e.line))
                    .collect(),
                None => Ok(vec![default; k]),
            }
        };
        let zeros = BinaryString::from_bits(vec![false; level as usize]);
        let ones = BinaryString::from_bits(vec![true; level as usize]);
        match kind {
            LemmaKind::Disagree => {
                let target = match s.entry("sigma") {
                    Some(e) => parse_label(&e.value, level, e.line)?,
                    None => zeros,
                };
                let args = labels("args", ones)?;
                if args.len() != k {
                    return Err(ConfigError::at(s.line_of("args"), format!("`{function}` takes {k} arguments")).into());
                }
                let r = case.disagree(function, &target, &args).map_err(|e| match e {
                    CliError::Core(err) => at_line(s.line_of("sigma"))(err),
                    other => other,
                })?;
                Ok(vec![r])
            }
            LemmaKind::Avoid => {
                let args = labels("args", zeros)?;
                if args.len() != k {
                    return Err(ConfigError::at(s.line_of("args"), format!("`{function}` takes {k} arguments")).into());
                }
                let gline = s.line_of("g");
                let g: BinaryString = s.require("g")?;
                if g.len() != lab.width() as usize {
                    return Err(ConfigError::at(gline, format!("`g` must have length {}", lab.width())).into());
                }
                Ok(vec![case.avoid(function, &args, &g)?])
            }
            LemmaKind::Extend => unreachable!(),
        }
    }

    fn sweep(&self, ctx: &Context<'_>, kind: LemmaKind, cases: usize) -> Result<Vec<CaseRecord>, CliError> {
        let s = ctx.scenario;
        let base = ctx.lab.model();
        let (lo, hi) = match s.entry("a_range") {
            Some(e) => parse_range(&e.value, e.line)?,
            None => (base.width(), base.width()),
        };
        let all: bool = s.parse_key("all_functions")?.unwrap_or(false);
        let functions: Vec<(String, usize)> = if all {
            base.functions()
                .filter(|f| f.arity <= 2)
                .map(|f| (f.name.clone(), f.arity))
                .collect()
        } else {
            let name = s.get("function").unwrap_or(scottlab_core::model::IDENTITY);
            let f = base.function(name).map_err(at_line(s.line_of("function")))?;
            vec![(f.name.clone(), f.arity)]
        };
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.settings.seed);
        let mut out = Vec::new();
        for _ in 0..cases {
            let a = rng.gen_range(lo..=hi);
            let model = base.with_width(a)?;
            let lab = Lab::new(model, ctx.lab.counter_arc()).with_budget(ctx.lab.budget());
            let level = match kind {
                LemmaKind::Disagree => 1,
                _ => rng.gen_range(0..=1),
            };
            let formulas = random_product(&mut rng, a, level);
            let case = Case {
                p: Condition::new(&lab, formulas, level)?,
                lab: &lab,
            };
            let labels: Vec<BinaryString> = BinaryString::all_of_length(level).collect();
            match kind {
                LemmaKind::Extend => out.push(case.extend()?),
                LemmaKind::Disagree => {
                    for (f, k) in &functions {
                        let target = labels[rng.gen_range(0..labels.len())].clone();
                        let pool: Vec<BinaryString> = labels.iter().filter(|t| **t != target).cloned().collect();
                        let args = pick(&mut rng, &pool, *k);
                        out.push(case.disagree(f, &target, &args)?);
                    }
                }
                LemmaKind::Avoid => {
                    for (f, k) in &functions {
                        let args = pick(&mut rng, &labels, *k);
                        let g = random_bits(&mut rng, a);
                        out.push(case.avoid(f, &args, &g)?);
                        let (h, _) = case.p.majority_profile(&lab, f, &args)?;
                        if h != g {
                            out.push(case.avoid(f, &args, &h)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Mode for LemmaCheck {
    fn name(&self) -> &'static str {
        "lemma-check"
    }

    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError> {
        let s = ctx.scenario;
        let kind: LemmaKind = s.require("lemma")?;
        let cases: Option<usize> = s.parse_key("cases")?;
        let records = match cases {
            Some(n) => self.sweep(ctx, kind, n)?,
            None => self.single(ctx, kind)?,
        };

        let mut names: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
        for r in &records {
            for c in &r.checks {
                names.entry(c.name.as_str()).or_default().push(c.pass);
            }
        }
        let mut checks: Vec<Check> = names
            .into_iter()
            .map(|(n, rs)| Check::tally(format!("{}.{n}", kind.tag()), rs))
            .collect();
        if records.is_empty() {
            checks.push(Check::new(format!("{}.cases", kind.tag()), false).with_detail("no cases were run"));
        }
        let impossible = records.iter().filter(|r| r.outcome == "impossible").count();
        let lemma = match kind {
            LemmaKind::Extend => LemmaTag::Extend,
            LemmaKind::Disagree => LemmaTag::Disagree,
            LemmaKind::Avoid => LemmaTag::Avoid,
        };
        let result = json!({
            "lemma": lemma,
            "cases": records.len(),
            "impossible": impossible,
            "records": to_value(&records),
        });
        Ok(Outcome { result, checks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_names() {
        assert_eq!("avoid".parse::<LemmaKind>(), Ok(LemmaKind::Avoid));
        assert_eq!("3.4".parse::<LemmaKind>(), Ok(LemmaKind::Disagree));
        assert!("split".parse::<LemmaKind>().is_err());
    }

    #[test]
    fn random_products_are_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lab = Lab::new(MiniModel::new(3).unwrap(), std::sync::Arc::new(Exhaustive));
        for _ in 0..50 {
            let fs = random_product(&mut rng, 3, 1);
            let p = Condition::new(&lab, fs, 1).unwrap();
            assert!(p.density() >= Density::new(1, 4));
            assert!(p.formulas().iter().all(|f| f.variables().len() == 1));
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5", None).unwrap(), (2, 5));
        assert_eq!(parse_range("3..=3", None).unwrap(), (3, 3));
        assert!(parse_range("5..2", None).is_err());
    }
}
