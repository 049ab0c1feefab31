use scottlab_core::generic::filter_mode;
use serde_json::json;

use super::generic::{chain_checks, steps_json};
use super::{parse_requirements, to_value, Context, Mode, Outcome};
use crate::error::{at_line, CliError};
use crate::report::Check;

pub struct Filter;

impl Mode for Filter {
    fn name(&self) -> &'static str {
        "filter"
    }

    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError> {
        let s = ctx.scenario;
        let n_final: u32 = s.parse_key("n_final")?.unwrap_or(0);
        let reqs = parse_requirements(ctx)?;
        let (filter, seq) = filter_mode(&ctx.lab, &reqs, n_final).map_err(at_line(s.line_of("n_final")))?;

        let minimum = filter
            .minimum()
            .and_then(|m| filter.members.iter().position(|c| c == m));
        let mut checks = chain_checks(&seq);
        checks.push(Check::new("directed", filter.is_directed()));
        checks.push(Check::new("upward-closed", filter.is_upward_closed()));
        checks.push(Check::new("has-minimum", minimum.is_some()));
        checks.push(Check::new(
            "meets-requirements",
            (0..reqs.len()).all(|j| filter.meets.iter().any(|&(r, _)| r == j)),
        ));

        let members: Vec<_> = filter
            .members
            .iter()
            .enumerate()
            .map(|(i, c)| {
                json!({
                    "index": i,
                    "level": c.level(),
                    "formulas": c.formulas().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "count": to_value(&c.count()),
                    "total": to_value(&c.total()),
                    "density": c.density(),
                })
            })
            .collect();
        let meets: Vec<_> = filter
            .meets
            .iter()
            .map(|&(r, m)| json!({ "requirement": r, "member": m }))
            .collect();
        let result = json!({
            "n_final": n_final,
            "requirements": reqs.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "members": members,
            "minimum": minimum,
            "meets": meets,
            "steps": steps_json(&seq),
        });
        Ok(Outcome { result, checks })
    }
}
