//! The counter used to re-derive a report's counts.

use std::sync::atomic::{AtomicU64, Ordering};

use scottlab_core::count::{Compressed, Exhaustive, Problem};
use scottlab_core::{Counter, Result};

/// Routes each problem to a back end other than `avoid` when one can take
/// it: plain enumeration when the space fits the budget, the compressed
/// counter otherwise. Tallies how often each route was taken.
pub struct Recount {
    avoid: String,
    exhaustive: AtomicU64,
    compressed: AtomicU64,
}

impl Recount {
    pub fn new(avoid: &str) -> Self {
        Self {
            avoid: avoid.to_string(),
            exhaustive: AtomicU64::new(0),
            compressed: AtomicU64::new(0),
        }
    }

    fn pick(&self, p: &Problem<'_>) -> &'static dyn Counter {
        let fits = p.total() <= p.budget() as u128;
        if fits && self.avoid != Exhaustive.name() {
            self.exhaustive.fetch_add(1, Ordering::Relaxed);
            &Exhaustive
        } else {
            self.compressed.fetch_add(1, Ordering::Relaxed);
            &Compressed
        }
    }

    pub fn routes(&self) -> Vec<(String, u64)> {
        vec![
            (Exhaustive.name().to_string(), self.exhaustive.load(Ordering::Relaxed)),
            (Compressed.name().to_string(), self.compressed.load(Ordering::Relaxed)),
        ]
    }
}

impl Counter for Recount {
    fn name(&self) -> &'static str {
        "recount"
    }

    fn count(&self, problem: &Problem<'_>) -> Result<u128> {
        self.pick(problem).count(problem)
    }

    fn first_solution(&self, problem: &Problem<'_>) -> Result<Option<Vec<u64>>> {
        self.pick(problem).first_solution(problem)
    }
}
