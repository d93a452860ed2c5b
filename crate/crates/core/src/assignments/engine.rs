//! Forcing engine: least fixed point of rules (i) and (ii) with a trail for
//! backtracking and a derivation log for explanations.

use serde::Serialize;

use super::{split_premises, Assignment, Premise, Value};
use crate::diagram::Diagram;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Premise,
    Decision,
    /// (i): a 1 in the context forces the other members to 0.
    ExclusiveOne,
    /// (ii): two 0s in the context force the third member to 1.
    CompleteContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cell {
    Free,
    Zero,
    One,
    /// Decided value indefinite; being forced is a contradiction.
    Undef,
}

impl Cell {
    fn of(v: Value) -> Cell {
        match v {
            Value::Zero => Cell::Zero,
            Value::One => Cell::One,
        }
    }

    fn value(self) -> Option<Value> {
        match self {
            Cell::Zero => Some(Value::Zero),
            Cell::One => Some(Value::One),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawStep {
    pub rule: Rule,
    pub context: Option<usize>,
    pub observable: usize,
    pub cell: Cell,
    pub forcing: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawConflict {
    pub rule: Rule,
    pub context: Option<usize>,
    pub observable: usize,
    pub required: Value,
    pub found: Cell,
    pub forcing: Vec<usize>,
}

/// One rule application, by observable id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<[String; 3]>,
    pub observable: String,
    /// `None` for an observable decided value indefinite.
    pub value: Option<Value>,
    pub forcing: Vec<String>,
}

/// An observable forced to a value it cannot take, with the derivation
/// steps that lead there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conflict {
    pub rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<[String; 3]>,
    pub observable: String,
    pub required: Value,
    /// What the observable already held: its value, or `None` if decided indefinite.
    pub found: Option<Value>,
    pub forcing: Vec<String>,
    pub trace: Vec<Step>,
}

impl Conflict {
    /// Human-readable forcing chain.
    pub fn narrative(&self) -> String {
        let mut out = String::new();
        for s in &self.trace {
            out.push_str(&describe(s.rule, &s.observable, s.value, &s.forcing, s.context.as_ref()));
            out.push('\n');
        }
        let found = match self.found {
            Some(v) => format!("already {v}"),
            None => "declared indefinite".to_string(),
        };
        out.push_str(&format!(
            "contradiction: {} ⇒ v({}) = {}, but it is {}",
            describe_cause(self.rule, &self.forcing, self.context.as_ref()),
            self.observable,
            self.required,
            found
        ));
        out
    }
}

fn describe_cause(rule: Rule, forcing: &[String], context: Option<&[String; 3]>) -> String {
    let ctx = context
        .map(|c| format!(" in {{{}}}", c.join(", ")))
        .unwrap_or_default();
    match rule {
        Rule::ExclusiveOne => format!("v({}) = 1{ctx}", forcing.join(", ")),
        Rule::CompleteContext => format!("v({}) = 0{ctx}", forcing.join(") = v(")),
        Rule::Premise => "premise".to_string(),
        Rule::Decision => "decision".to_string(),
    }
}

fn describe(rule: Rule, obs: &str, value: Option<Value>, forcing: &[String], ctx: Option<&[String; 3]>) -> String {
    let v = value.map(|v| v.to_string()).unwrap_or_else(|| "undefined".into());
    match rule {
        Rule::Premise => format!("premise: v({obs}) = {v}"),
        Rule::Decision => format!("decide: v({obs}) = {v}"),
        _ => format!("{} ⇒ v({obs}) = {v}", describe_cause(rule, forcing, ctx)),
    }
}

pub(crate) struct Engine<'d> {
    pub d: &'d Diagram,
    occ: Vec<Vec<usize>>,
    pub cells: Vec<Cell>,
    /// log index of the step that set each cell
    reason: Vec<usize>,
    pub log: Vec<RawStep>,
    head: usize,
}

impl<'d> Engine<'d> {
    pub fn new(d: &'d Diagram) -> Self {
        Engine {
            d,
            occ: d.occurrences(),
            cells: vec![Cell::Free; d.len()],
            reason: vec![usize::MAX; d.len()],
            log: Vec::new(),
            head: 0,
        }
    }

    pub fn degree(&self, o: usize) -> usize {
        self.occ[o].len()
    }

    pub fn mark(&self) -> usize {
        self.log.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.log.len() > mark {
            let s = self.log.pop().unwrap();
            self.cells[s.observable] = Cell::Free;
            self.reason[s.observable] = usize::MAX;
        }
        self.head = self.head.min(mark);
    }

    fn push(&mut self, step: RawStep) {
        self.cells[step.observable] = step.cell;
        self.reason[step.observable] = self.log.len();
        self.log.push(step);
    }

    /// Records a premise or decision. Never conflicts on a free cell.
    pub fn decide(&mut self, o: usize, cell: Cell, rule: Rule) -> std::result::Result<(), RawConflict> {
        match (self.cells[o], cell) {
            (Cell::Free, _) => {
                self.push(RawStep { rule, context: None, observable: o, cell, forcing: vec![] });
                Ok(())
            }
            (have, want) if have == want => Ok(()),
            (have, want) => Err(RawConflict {
                rule,
                context: None,
                observable: o,
                required: want.value().unwrap_or(Value::Zero),
                found: have,
                forcing: vec![],
            }),
        }
    }

    fn force(
        &mut self,
        o: usize,
        v: Value,
        rule: Rule,
        ctx: usize,
        forcing: Vec<usize>,
    ) -> std::result::Result<(), RawConflict> {
        let want = Cell::of(v);
        match self.cells[o] {
            Cell::Free => {
                self.push(RawStep { rule, context: Some(ctx), observable: o, cell: want, forcing });
                Ok(())
            }
            have if have == want => Ok(()),
            have => Err(RawConflict { rule, context: Some(ctx), observable: o, required: v, found: have, forcing }),
        }
    }

    /// Runs the forcing rules to a fixed point over everything logged since
    /// the last call.
    pub fn propagate(&mut self) -> std::result::Result<(), RawConflict> {
        while self.head < self.log.len() {
            let o = self.log[self.head].observable;
            self.head += 1;
            if self.cells[o] == Cell::Undef {
                continue;
            }
            for k in 0..self.occ[o].len() {
                let c = self.occ[o][k];
                self.check_context(c)?;
            }
        }
        Ok(())
    }

    fn check_context(&mut self, c: usize) -> std::result::Result<(), RawConflict> {
        let members = self.d.contexts()[c];
        let cells = members.map(|m| self.cells[m]);
        let ones: Vec<usize> = (0..3).filter(|&i| cells[i] == Cell::One).map(|i| members[i]).collect();
        if let Some(&first) = ones.first() {
            for &m in &members {
                if m != first {
                    self.force(m, Value::Zero, Rule::ExclusiveOne, c, vec![first])?;
                }
            }
            return Ok(());
        }
        let zeros: Vec<usize> = (0..3).filter(|&i| cells[i] == Cell::Zero).map(|i| members[i]).collect();
        if zeros.len() >= 2 {
            let target = members
                .iter()
                .copied()
                .find(|m| !zeros[..2].contains(m))
                .expect("three distinct members");
            self.force(target, Value::One, Rule::CompleteContext, c, zeros[..2].to_vec())?;
        }
        Ok(())
    }

    pub fn assignment(&self) -> Assignment {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.value().map(|v| (self.d.id(i).to_string(), v)))
            .collect()
    }

    fn ctx_ids(&self, c: Option<usize>) -> Option<[String; 3]> {
        c.map(|c| self.d.context_ids(c).map(str::to_string))
    }

    fn step(&self, s: &RawStep) -> Step {
        Step {
            rule: s.rule,
            context: self.ctx_ids(s.context),
            observable: self.d.id(s.observable).to_string(),
            value: s.cell.value(),
            forcing: s.forcing.iter().map(|&m| self.d.id(m).to_string()).collect(),
        }
    }

    pub fn steps(&self) -> Vec<Step> {
        self.log.iter().map(|s| self.step(s)).collect()
    }

    /// Converts a raw conflict, keeping only the log entries it depends on.
    pub fn explain(&self, raw: &RawConflict) -> Conflict {
        let mut needed = vec![false; self.log.len()];
        let mut stack: Vec<usize> = raw.forcing.clone();
        stack.push(raw.observable);
        while let Some(o) = stack.pop() {
            let r = self.reason[o];
            if r == usize::MAX || needed[r] {
                continue;
            }
            needed[r] = true;
            stack.extend(self.log[r].forcing.iter().copied());
        }
        let trace = self
            .log
            .iter()
            .zip(&needed)
            .filter(|(_, n)| **n)
            .map(|(s, _)| self.step(s))
            .collect();
        Conflict {
            rule: raw.rule,
            context: self.ctx_ids(raw.context),
            observable: self.d.id(raw.observable).to_string(),
            required: raw.required,
            found: raw.found.value(),
            forcing: raw.forcing.iter().map(|&m| self.d.id(m).to_string()).collect(),
            trace,
        }
    }
}

/// Outcome of [`propagate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Propagation {
    /// The forced values, plus every rule application in order.
    Closure { assignment: Assignment, steps: Vec<Step> },
    Conflict(Conflict),
}

impl Propagation {
    pub fn closure(&self) -> Option<&Assignment> {
        match self {
            Propagation::Closure { assignment, .. } => Some(assignment),
            Propagation::Conflict(_) => None,
        }
    }
}

/// Least fixed point of rules (i)/(ii) from the premises.
///
/// `definite` premises contribute no facts here; [`super::exists_admissible`]
/// branches on them.
pub fn propagate(d: &Diagram, premises: &[Premise]) -> Result<Propagation> {
    let (fixed, _) = split_premises(d, premises)?;
    let mut e = Engine::new(d);
    for (o, v) in fixed {
        if let Err(c) = e.decide(o, Cell::of(v), Rule::Premise) {
            return Ok(Propagation::Conflict(e.explain(&c)));
        }
    }
    Ok(match e.propagate() {
        Ok(()) => Propagation::Closure { assignment: e.assignment(), steps: e.steps() },
        Err(c) => Propagation::Conflict(e.explain(&c)),
    })
}

pub(crate) fn cell_of(v: Value) -> Cell {
    Cell::of(v)
}
