use scottlab_core::generic::{check_generic_fragment, realize_and_extract, DescendingSequence, Requirement};
use scottlab_core::model::IDENTITY;
use scottlab_core::BinaryString;
use serde_json::{json, Value};

use super::{parse_label, parse_requirements, to_value, Context, Mode, Outcome};
use crate::config::split_list;
use crate::error::{at_line, CliError};
use crate::report::Check;

pub struct Generic;

pub(super) fn steps_json(seq: &DescendingSequence) -> Value {
    let steps: Vec<Value> = seq
        .steps
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let c = &st.condition;
            json!({
                "index": i,
                "requirement": st.requirement,
                "level": c.level(),
                "formulas": c.formulas().len(),
                "count": to_value(&c.count()),
                "total": to_value(&c.total()),
                "density": c.density(),
                "certificate": st.certificate,
            })
        })
        .collect();
    Value::Array(steps)
}

pub(super) fn chain_checks(seq: &DescendingSequence) -> Vec<Check> {
    vec![
        Check::new("chain", seq.is_chain()),
        Check::new(
            "levels",
            seq.levels_monotone() && seq.last().level() == seq.n_final,
        ),
        Check::new("densities-positive", seq.conditions().all(|c| c.density().is_positive())),
        Check::new("bounds", seq.bounds_hold()),
    ]
}

impl Mode for Generic {
    fn name(&self) -> &'static str {
        "generic"
    }

    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError> {
        let s = ctx.scenario;
        let n_final: u32 = s.require("n_final")?;
        let reqs = parse_requirements(ctx)?;
        let mut families = Vec::new();
        for e in s.all("family") {
            let fam = split_list(&e.value)
                .into_iter()
                .map(|t| parse_label(t, n_final, e.line))
                .collect::<Result<Vec<BinaryString>, _>>()?;
            families.push(fam);
        }

        let lab = &ctx.lab;
        let seq = scottlab_core::generic::run_schedule(lab, &reqs, n_final).map_err(at_line(s.line_of("n_final")))?;
        let fragment = check_generic_fragment(&seq, lab)?;
        let report = realize_and_extract(&seq, lab, &families)?;

        let mut checks = chain_checks(&seq);
        checks.push(Check::new("fragment", fragment.steps.iter().all(|st| st.realized)));
        checks.push(Check::new("final-formulas-hold", report.final_formulas_hold));
        let at_final = |f: &str| {
            seq.batches.iter().any(|b| {
                b.level == n_final
                    && matches!(&reqs[b.requirement], Requirement::Disagree { function } if function == f)
            })
        };
        if at_final(IDENTITY) {
            checks.push(Check::tally("prefixes-distinct", report.pairs.iter().map(|p| p.bit.is_some())));
        }
        if reqs.iter().any(|r| matches!(r, Requirement::Disagree { .. })) && !report.separations.is_empty() {
            checks.push(Check::tally("separation", report.separations.iter().map(|f| f.separated())));
        }
        if !report.avoidance.is_empty() {
            checks.push(Check::tally("avoidance", report.avoidance.iter().map(|w| w.holds)));
        }

        let result = json!({
            "n_final": n_final,
            "requirements": reqs.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "steps": steps_json(&seq),
            "batches": seq.batches,
            "fragment": {
                "level": fragment.level,
                "formulas": fragment.formulas.len(),
                "realization": fragment.realization,
                "steps": fragment.steps,
            },
            "families": to_value(&report),
        });
        Ok(Outcome { result, checks })
    }
}
