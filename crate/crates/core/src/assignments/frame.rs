//! Boolean frame functions: total {0,1} assignments with exactly one 1 in
//! every context.
//!
//! For total assignments that is the same as admissibility, so the search is
//! the admissible-assignment search with the undefined value removed.
//! `definite` premises are vacuous here.

use super::engine::{cell_of, Engine, Rule};
use super::search::{branch_order, decide, dfs, Counter, Domain, SolverConfig, Verdict};
use super::{split_premises, Premise};
use crate::diagram::Diagram;
use crate::error::Result;

pub fn boolean_frame_function_exists(d: &Diagram, premises: &[Premise], cfg: &SolverConfig) -> Result<Verdict> {
    let fixed: Vec<Premise> = premises
        .iter()
        .filter(|p| p.req != super::Requirement::Definite)
        .cloned()
        .collect();
    decide(d, &fixed, Domain::Total, cfg)
}

/// Counts Boolean frame functions satisfying the premises, stopping at `limit`.
pub fn count_boolean_frame_functions(d: &Diagram, premises: &[Premise], limit: u64, cfg: &SolverConfig) -> Result<u64> {
    let (fixed, _) = split_premises(d, premises)?;
    let mut e = Engine::new(d);
    for (o, v) in fixed {
        if e.decide(o, cell_of(v), Rule::Premise).is_err() {
            return Ok(0);
        }
    }
    if e.propagate().is_err() {
        return Ok(0);
    }
    let order = branch_order(&e);
    let mut counter = Counter { nodes: 0, budget: cfg.budget };
    let mut found = 0u64;
    dfs(&mut e, &order, 0, Domain::Total, &mut counter, &mut |_| {
        found += 1;
        found >= limit
    })?;
    Ok(found)
}
