//! Admissible partial value assignments.
//!
//! Assignments are non-contextual by construction: one value slot per
//! observable, shared by every context containing it. A missing value means
//! the observable is value indefinite. Admissibility is checked per context:
//!
//! * (i)  a member valued 1 forces every other member to be defined and 0;
//! * (ii) two members valued 0 force the third to be defined and 1.
//!
//! A *contradiction* for a partial assignment means some observable forced
//! to both 0 and 1, forced while declared indefinite, or a rule violation
//! among defined values.

mod engine;
mod frame;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diagram::Diagram;
use crate::error::{Error, Result};

pub use engine::{propagate, Conflict, Propagation, Rule, Step};
pub use frame::{boolean_frame_function_exists, count_boolean_frame_functions};
pub use search::{check_value_indefinite, exists_admissible, ConflictTree, Refutation, SolverConfig, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Zero,
    One,
}

impl Value {
    pub fn as_u8(self) -> u8 {
        match self {
            Value::Zero => 0,
            Value::One => 1,
        }
    }

    pub fn flip(self) -> Value {
        match self {
            Value::Zero => Value::One,
            Value::One => Value::Zero,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(Value::Zero),
            1 => Ok(Value::One),
            other => Err(serde::de::Error::custom(format!("value must be 0 or 1, got {other}"))),
        }
    }
}

/// Partial map from observable id to {0, 1}.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    values: BTreeMap<String, Value>,
}

impl Assignment {
    pub fn get(&self, id: &str) -> Option<Value> {
        self.values.get(id).copied()
    }

    pub fn set(&mut self, id: impl Into<String>, v: Value) {
        self.values.insert(id.into(), v);
    }

    pub fn unset(&mut self, id: &str) {
        self.values.remove(id);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn satisfies(&self, premises: &[Premise]) -> bool {
        premises.iter().all(|p| match p.req {
            Requirement::One => self.get(&p.id) == Some(Value::One),
            Requirement::Zero => self.get(&p.id) == Some(Value::Zero),
            Requirement::Definite => self.get(&p.id).is_some(),
        })
    }
}

impl<S: Into<String>> FromIterator<(S, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    One,
    Zero,
    Definite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Premise {
    pub id: String,
    pub req: Requirement,
}

impl Premise {
    pub fn one(id: impl Into<String>) -> Self {
        Premise { id: id.into(), req: Requirement::One }
    }

    pub fn zero(id: impl Into<String>) -> Self {
        Premise { id: id.into(), req: Requirement::Zero }
    }

    pub fn definite(id: impl Into<String>) -> Self {
        Premise { id: id.into(), req: Requirement::Definite }
    }

    pub fn value(id: impl Into<String>, v: Value) -> Self {
        match v {
            Value::One => Premise::one(id),
            Value::Zero => Premise::zero(id),
        }
    }

    pub fn parse_list(json: &str) -> Result<Vec<Premise>> {
        Ok(serde_json::from_str(json)?)
    }
}

/// `id=1`, `id=0`, `id=definite` (also `one`, `zero`, `d`).
impl FromStr for Premise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Premise> {
        let (id, req) = s
            .rsplit_once('=')
            .ok_or_else(|| Error::Data(format!("premise `{s}` is not of the form id=value")))?;
        let req = match req.trim() {
            "1" | "one" => Requirement::One,
            "0" | "zero" => Requirement::Zero,
            "definite" | "d" => Requirement::Definite,
            other => return Err(Error::Data(format!("unknown premise requirement `{other}`"))),
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::Data(format!("premise `{s}` has an empty id")));
        }
        Ok(Premise { id: id.to_string(), req })
    }
}

/// Checks conditions (i) and (ii) on every context of `d`.
pub fn check_admissible(d: &Diagram, a: &Assignment) -> Result<bool> {
    for (id, _) in a.iter() {
        d.require(id)?;
    }
    for &ctx in d.contexts() {
        let vals = ctx.map(|m| a.get(d.id(m)));
        let ones = vals.iter().filter(|v| **v == Some(Value::One)).count();
        let zeros = vals.iter().filter(|v| **v == Some(Value::Zero)).count();
        if ones >= 1 && (ones > 1 || zeros != 2) {
            return Ok(false);
        }
        if zeros >= 2 && ones != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

type Split = (Vec<(usize, Value)>, Vec<usize>);

/// Splits premises into fixed values and `definite` requirements, rejecting
/// unknown ids and ids required to be both 0 and 1.
pub(crate) fn split_premises(
    d: &Diagram,
    premises: &[Premise],
) -> Result<Split> {
    let mut fixed: BTreeMap<usize, Value> = BTreeMap::new();
    let mut definite = Vec::new();
    for p in premises {
        let i = d.require(&p.id)?;
        match p.req {
            Requirement::Definite => {
                if !definite.contains(&i) {
                    definite.push(i);
                }
            }
            Requirement::One | Requirement::Zero => {
                let v = if p.req == Requirement::One { Value::One } else { Value::Zero };
                if let Some(prev) = fixed.insert(i, v) {
                    if prev != v {
                        return Err(Error::ContradictoryPremises(p.id.clone()));
                    }
                }
            }
        }
    }
    definite.retain(|i| !fixed.contains_key(i));
    Ok((fixed.into_iter().collect(), definite))
}
