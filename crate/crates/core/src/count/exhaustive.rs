use super::ir::Values;
use super::{Counter, Problem};
use crate::error::{Error, Result};

/// Plain enumeration of every assignment in the full space.
pub struct Exhaustive;

impl Exhaustive {
    fn scan(&self, p: &Problem<'_>, stop_at_first: bool) -> Result<(u128, Option<Vec<u64>>)> {
        let total = p.total();
        if total > p.budget as u128 {
            return Err(Error::BudgetExceeded {
                needed: total,
                budget: p.budget,
            });
        }
        let d = p.model.domain_size();
        let slots = p.slots();
        let mut vals = vec![0u64; slots];
        let mut hits = 0u128;
        loop {
            let env = Values(&vals);
            if p.props.iter().all(|q| q.eval(&env, p.model)) {
                hits += 1;
                if stop_at_first {
                    return Ok((hits, Some(vals)));
                }
            }
            // slot 0 is most significant, so this walks in lexicographic order
            let mut i = slots;
            loop {
                if i == 0 {
                    return Ok((hits, None));
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
}

impl Counter for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn count(&self, problem: &Problem<'_>) -> Result<u128> {
        Ok(self.scan(problem, false)?.0)
    }

    fn first_solution(&self, problem: &Problem<'_>) -> Result<Option<Vec<u64>>> {
        Ok(self.scan(problem, true)?.1)
    }
}
