//! Complete backtracking search over {1, 0, undefined}.

use serde::Serialize;

use super::engine::{cell_of, Cell, Engine, Rule};
use super::{split_premises, Assignment, Conflict, Premise, Value};
use crate::diagram::Diagram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of search nodes (decisions tried) per call.
    pub budget: u64,
    /// Explore the two branches of a `definite` premise concurrently.
    pub parallel_branches: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: 100_000_000,
            parallel_branches: false,
        }
    }
}

/// Why no admissible assignment exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConflictTree {
    /// Propagation from the premises alone is contradictory.
    Conflict(Conflict),
    /// A `definite` premise split into value branches, each refuted.
    Split {
        observable: String,
        branches: Vec<(Value, ConflictTree)>,
    },
    /// The decision tree below the premises was exhausted.
    Exhausted { nodes: u64 },
}

impl ConflictTree {
    pub fn leaves(&self) -> Vec<&Conflict> {
        match self {
            ConflictTree::Conflict(c) => vec![c],
            ConflictTree::Split { branches, .. } => branches.iter().flat_map(|(_, t)| t.leaves()).collect(),
            ConflictTree::Exhausted { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refutation {
    pub tree: ConflictTree,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Satisfiable { witness: Assignment },
    Unsatisfiable(Refutation),
}

impl Verdict {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, Verdict::Satisfiable { .. })
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            Verdict::Satisfiable { witness } => Some(witness),
            Verdict::Unsatisfiable(_) => None,
        }
    }

    /// 0 for satisfiable, 1 for unsatisfiable.
    pub fn exit_code(&self) -> i32 {
        if self.is_satisfiable() {
            0
        } else {
            1
        }
    }
}

/// Which value domain the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    /// {1, 0, undefined}: admissible partial assignments.
    Partial,
    /// {1, 0}, every observable defined: Boolean frame functions.
    Total,
}

impl Domain {
    fn choices(self) -> &'static [Cell] {
        match self {
            Domain::Partial => &[Cell::One, Cell::Zero, Cell::Undef],
            Domain::Total => &[Cell::One, Cell::Zero],
        }
    }
}

enum Leaf {
    Sat(Assignment),
    Unsat(ConflictTree),
}

pub(crate) struct Counter {
    pub nodes: u64,
    pub budget: u64,
}

impl Counter {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Error::SearchBudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }
}

/// Decision order: descending context-degree, ties by index.
pub(crate) fn branch_order(e: &Engine<'_>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..e.d.len()).collect();
    order.sort_by_key(|&o| (std::cmp::Reverse(e.degree(o)), o));
    order
}

/// Depth-first search over `order` from position `pos`. On success the
/// engine holds the witness.
pub(crate) fn dfs(
    e: &mut Engine<'_>,
    order: &[usize],
    pos: usize,
    domain: Domain,
    counter: &mut Counter,
    on_leaf: &mut dyn FnMut(&Engine<'_>) -> bool,
) -> Result<bool> {
    let Some(next) = (pos..order.len()).find(|&k| e.cells[order[k]] == Cell::Free) else {
        return Ok(on_leaf(e));
    };
    let o = order[next];
    for &choice in domain.choices() {
        counter.tick()?;
        let mark = e.mark();
        e.decide(o, choice, Rule::Decision).expect("free cell");
        if e.propagate().is_ok() && dfs(e, order, next + 1, domain, counter, on_leaf)? {
            return Ok(true);
        }
        e.undo_to(mark);
    }
    Ok(false)
}

fn solve_fixed(d: &Diagram, fixed: &[(usize, Value)], domain: Domain, counter: &mut Counter) -> Result<Leaf> {
    let mut e = Engine::new(d);
    for &(o, v) in fixed {
        if let Err(c) = e.decide(o, cell_of(v), Rule::Premise) {
            return Ok(Leaf::Unsat(ConflictTree::Conflict(e.explain(&c))));
        }
    }
    if let Err(c) = e.propagate() {
        return Ok(Leaf::Unsat(ConflictTree::Conflict(e.explain(&c))));
    }
    let order = branch_order(&e);
    let before = counter.nodes;
    if dfs(&mut e, &order, 0, domain, counter, &mut |_| true)? {
        Ok(Leaf::Sat(e.assignment()))
    } else {
        Ok(Leaf::Unsat(ConflictTree::Exhausted { nodes: counter.nodes - before }))
    }
}

/// Two-branch driver over `definite` premises (value 1 first, then 0).
fn drive(
    d: &Diagram,
    fixed: &[(usize, Value)],
    definite: &[usize],
    domain: Domain,
    cfg: &SolverConfig,
    counter: &mut Counter,
) -> Result<Leaf> {
    let Some((&first, rest)) = definite.split_first() else {
        return solve_fixed(d, fixed, domain, counter);
    };
    let run = |v: Value, counter: &mut Counter| -> Result<Leaf> {
        let mut f = fixed.to_vec();
        f.push((first, v));
        drive(d, &f, rest, domain, cfg, counter)
    };
    let (one, zero) = if cfg.parallel_branches {
        let budget = counter.budget.saturating_sub(counter.nodes);
        let mut c1 = Counter { nodes: 0, budget };
        let mut c0 = Counter { nodes: 0, budget };
        let (one, zero) = crate::par::join(|| run(Value::One, &mut c1), || run(Value::Zero, &mut c0));
        counter.nodes += c1.nodes + c0.nodes;
        (one?, zero?)
    } else {
        let one = run(Value::One, counter)?;
        if let Leaf::Sat(_) = one {
            return Ok(one);
        }
        (one, run(Value::Zero, counter)?)
    };
    Ok(match (one, zero) {
        (Leaf::Sat(w), _) | (_, Leaf::Sat(w)) => Leaf::Sat(w),
        (Leaf::Unsat(t1), Leaf::Unsat(t0)) => Leaf::Unsat(ConflictTree::Split {
            observable: d.id(first).to_string(),
            branches: vec![(Value::One, t1), (Value::Zero, t0)],
        }),
    })
}

pub(crate) fn decide(d: &Diagram, premises: &[Premise], domain: Domain, cfg: &SolverConfig) -> Result<Verdict> {
    let (fixed, definite) = split_premises(d, premises)?;
    let mut counter = Counter { nodes: 0, budget: cfg.budget };
    let leaf = drive(d, &fixed, &definite, domain, cfg, &mut counter)?;
    Ok(match leaf {
        Leaf::Sat(witness) => Verdict::Satisfiable { witness },
        Leaf::Unsat(tree) => Verdict::Unsatisfiable(Refutation { tree, nodes: counter.nodes }),
    })
}

/// Decides whether an admissible non-contextual partial assignment
/// satisfying the premises exists.
///
/// Branching tries 1, then 0, then undefined on each free observable, so a
/// satisfiable instance returns a witness that is as definite as the greedy
/// order allows.
pub fn exists_admissible(d: &Diagram, premises: &[Premise], cfg: &SolverConfig) -> Result<Verdict> {
    decide(d, premises, Domain::Partial, cfg)
}

/// True iff, with `a` valued 1, no admissible assignment gives `b` a
/// definite value.
pub fn check_value_indefinite(d: &Diagram, a_id: &str, b_id: &str, cfg: &SolverConfig) -> Result<bool> {
    d.require(a_id)?;
    d.require(b_id)?;
    if a_id == b_id {
        // {a=1, b=0} is contradictory outright; {a=1, b=1} is {a=1}.
        return Ok(!exists_admissible(d, &[Premise::one(a_id)], cfg)?.is_satisfiable());
    }
    for v in [Value::One, Value::Zero] {
        let verdict = exists_admissible(d, &[Premise::one(a_id), Premise::value(b_id, v)], cfg)?;
        if verdict.is_satisfiable() {
            return Ok(false);
        }
    }
    Ok(true)
}
