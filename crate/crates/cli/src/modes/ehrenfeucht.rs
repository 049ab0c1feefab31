use scottlab_core::ehrenfeucht::{run_ehrenfeucht, IdealElement};
use scottlab_core::model::{bits_of, encode_bits, IDENTITY};
use scottlab_core::BinaryString;
use serde_json::json;

use super::{to_value, Context, Mode, Outcome};
use crate::config::{split_list, ConfigError};
use crate::error::{at_line, CliError};
use crate::report::Check;

pub struct Ehrenfeucht;

impl Mode for Ehrenfeucht {
    fn name(&self) -> &'static str {
        "ehrenfeucht"
    }

    fn run(&self, ctx: &Context<'_>) -> Result<Outcome, CliError> {
        let s = ctx.scenario;
        let model = ctx.lab.model();
        let a = model.width() as usize;

        let depth: usize = s.require("depth")?;
        if depth > a {
            return Err(ConfigError::at(s.line_of("depth"), format!("depth {depth} exceeds a = {a}")).into());
        }
        let fline = s.line_of("funcs");
        let funcs: Vec<&str> = match s.get("funcs") {
            Some(v) => split_list(v),
            None => vec![IDENTITY],
        };
        if funcs.first() != Some(&IDENTITY) {
            return Err(ConfigError::at(fline, format!("`funcs` must start with {IDENTITY}")).into());
        }
        for f in &funcs {
            model.resolve(f, 1).map_err(at_line(fline))?;
        }
        let tline = s.line_of("target");
        let target: BinaryString = s.require("target")?;
        if target.len() < depth {
            return Err(ConfigError::at(tline, format!("target is shorter than depth {depth}")).into());
        }

        let run = run_ehrenfeucht(model, &funcs, &IdealElement(target.clone()), depth, ctx.lab.budget())
            .map_err(at_line(tline))?;

        // independent scan of the whole domain
        let codes = |c: u64, upto: usize| -> bool {
            funcs[..=upto]
                .iter()
                .zip(&run.prefixes)
                .all(|(f, x)| bits_of(model.apply(f, &[c]).unwrap(), depth) == *x)
        };
        let scan = |upto: usize| (0..model.domain_size()).filter(|&c| codes(c, upto)).collect::<Vec<_>>();
        let final_set = scan(funcs.len() - 1);
        let mut checks = vec![
            Check::new("witness-codes-prefixes", run.witness_codes_prefixes(model)?),
            Check::new("least-witness", final_set.first() == Some(&run.witness)),
            Check::new("derived-full-depth", run.stages.iter().all(|st| st.derived_full_depth)),
            Check::new(
                "candidate-counts",
                run.initial_candidates == scan(0).len() as u64
                    && run
                        .stages
                        .iter()
                        .enumerate()
                        .all(|(k, st)| st.candidates_after == scan(k + 1).len() as u64),
            ),
            Check::new(
                "fragment",
                (0..model.domain_size()).all(|c| run.fragment.holds(model, c).unwrap() == final_set.contains(&c)),
            ),
        ];
        if funcs == [IDENTITY] {
            let x = target.prefix(depth)?;
            checks.push(Check::new("identity-witness", run.witness == encode_bits(&x)));
        }
        let result = json!({
            "run": to_value(&run),
            "witness_prefixes": run.prefixes.iter().map(ToString::to_string).collect::<Vec<_>>(),
        });
        Ok(Outcome { result, checks })
    }
}
