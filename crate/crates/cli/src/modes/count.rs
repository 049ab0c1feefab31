use scottlab_core::{BinaryString, Density, Formula};
use serde_json::json;

use super::{to_value, Context, Mode, Outcome};
use crate::config::ConfigError;
use crate::error::{at_line, CliError};

pub struct Count;

impl Mode for Count {
    fn name(&self) -> &'static str {
        "count"
    }

    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError> {
        let level: u32 = ctx.scenario.parse_key("level")?.unwrap_or(0);
        let mut formulas = Vec::new();
        for e in ctx.scenario.all("formula") {
            let f: Formula = e
                .value
                .parse()
                .map_err(|err: scottlab_core::SyntaxError| ConfigError::at(e.line, err.to_string()))?;
            f.check_level(level as usize).map_err(at_line(e.line))?;
            formulas.push(f);
        }
        let lab = &ctx.lab;
        let line = ctx.scenario.line_of("level");
        let total = lab.total(level).map_err(at_line(line))?;
        let count = lab.count(level, &formulas).map_err(at_line(line))?;
        let first = lab.first_solution(level, &formulas)?.map(|vals| {
            BinaryString::all_of_length(level)
                .zip(vals)
                .map(|(s, v)| json!({ "label": s, "value": v }))
                .collect::<Vec<_>>()
        });
        let result = json!({
            "level": level,
            "formulas": formulas.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "count": to_value(&count),
            "total": to_value(&total),
            "density": Density::new(count, total),
            "first_solution": first,
        });
        Ok(Outcome {
            result,
            checks: Vec::new(),
        })
    }
}
