//! Greechie orthogonality hypergraphs.
//!
//! Observables are vertices; contexts (triples of mutually orthogonal
//! observables) are hyperedges. Observables may carry a [`Ray`] realization,
//! but abstract diagrams, e.g. gadget topologies read from `data/`, are
//! first-class.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assignments::{Assignment, Value};
use crate::error::{Error, Result};
use crate::numfmt;
use crate::vec3::{inner, Ray, Vector3};

/// Norm slack accepted when reading vectors from JSON; they are normalized on load.
pub const LOAD_UNIT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub id: String,
    pub realization: Option<Ray>,
}

/// A context as indices into the owning diagram's observables.
pub type Context = [usize; 3];

#[derive(Debug, Clone, Default)]
pub struct Diagram {
    observables: Vec<Observable>,
    contexts: Vec<Context>,
    index: HashMap<String, usize>,
    context_keys: HashMap<[usize; 3], usize>,
    /// Free-form provenance note carried through JSON.
    pub description: Option<String>,
}

fn sorted3(mut c: [usize; 3]) -> [usize; 3] {
    c.sort_unstable();
    c
}

impl Diagram {
    pub fn new() -> Self {
        Diagram::default()
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn id(&self, i: usize) -> &str {
        &self.observables[i].id
    }

    pub fn realization(&self, i: usize) -> Option<Ray> {
        self.observables[i].realization
    }

    pub fn ray_of(&self, id: &str) -> Option<Ray> {
        self.index_of(id).and_then(|i| self.realization(i))
    }

    pub fn context_ids(&self, c: usize) -> [&str; 3] {
        let [i, j, k] = self.contexts[c];
        [self.id(i), self.id(j), self.id(k)]
    }

    pub fn is_fully_realized(&self) -> bool {
        self.observables.iter().all(|o| o.realization.is_some())
    }

    pub fn is_abstract(&self) -> bool {
        self.observables.iter().all(|o| o.realization.is_none())
    }

    pub fn add_observable(&mut self, id: impl Into<String>, realization: Option<Ray>) -> Result<usize> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let i = self.observables.len();
        self.index.insert(id.clone(), i);
        self.observables.push(Observable { id, realization });
        Ok(i)
    }

    pub fn set_realization(&mut self, i: usize, ray: Option<Ray>) {
        self.observables[i].realization = ray;
    }

    /// Adds a context by observable indices. A context equal (as a set) to an
    /// existing one is not duplicated; its index is returned instead.
    pub fn add_context_indices(&mut self, members: [usize; 3]) -> Result<usize> {
        let [i, j, k] = members;
        if i == j || j == k || i == k {
            return Err(Error::MalformedContext(format!(
                "repeated member in {:?}",
                members.map(|m| self.observables.get(m).map(|o| o.id.as_str()).unwrap_or("?"))
            )));
        }
        if members.iter().any(|&m| m >= self.observables.len()) {
            return Err(Error::MalformedContext(format!("index out of range in {members:?}")));
        }
        let key = sorted3(members);
        if let Some(&existing) = self.context_keys.get(&key) {
            return Ok(existing);
        }
        let c = self.contexts.len();
        self.contexts.push(members);
        self.context_keys.insert(key, c);
        Ok(c)
    }

    pub fn add_context(&mut self, ids: [&str; 3]) -> Result<usize> {
        let members = [self.require(ids[0])?, self.require(ids[1])?, self.require(ids[2])?];
        self.add_context_indices(members)
    }

    pub fn has_context(&self, members: [usize; 3]) -> bool {
        self.context_keys.contains_key(&sorted3(members))
    }

    /// Context indices containing each observable.
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.len()];
        for (c, ctx) in self.contexts.iter().enumerate() {
            for &m in ctx {
                occ[m].push(c);
            }
        }
        occ
    }

    /// Builds the diagram whose contexts are all triples of mutually
    /// orthogonal rays (`|⟨u|v⟩| ≤ tol` pairwise).
    ///
    /// Contexts are listed in lexicographic order of their sorted id
    /// triples, so the result does not depend on input order.
    pub fn from_rays(rays: &[(String, Ray)], tol: f64) -> Result<Diagram> {
        let mut d = Diagram::new();
        for (id, ray) in rays {
            d.add_observable(id.clone(), Some(*ray))?;
        }
        let n = rays.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if inner(rays[i].1, rays[j].1) <= tol {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut found: Vec<[usize; 3]> = Vec::new();
        for i in 0..n {
            for &j in adj[i].iter().filter(|&&j| j > i) {
                for &k in adj[j].iter().filter(|&&k| k > j) {
                    if adj[i].binary_search(&k).is_ok() {
                        found.push([i, j, k]);
                    }
                }
            }
        }
        let key = |c: &[usize; 3]| {
            let mut ids = c.map(|m| rays[m].0.clone());
            ids.sort();
            ids
        };
        found.sort_by_key(key);
        for c in found {
            let mut c = c;
            c.sort_by(|&x, &y| rays[x].0.cmp(&rays[y].0));
            d.add_context_indices(c)?;
        }
        Ok(d)
    }

    /// Checks orthogonality of every fully realized context and unit norm of
    /// every realization.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let observables: Vec<ObservableCheck> = self
            .observables
            .iter()
            .map(|o| ObservableCheck {
                id: o.id.clone(),
                unit_deviation: o.realization.map(|r| (r.vector().norm() - 1.0).abs()),
            })
            .collect();
        let contexts: Vec<ContextCheck> = self
            .contexts
            .iter()
            .enumerate()
            .map(|(c, ctx)| {
                let rays: Option<Vec<Ray>> = ctx.iter().map(|&m| self.realization(m)).collect();
                let max_deviation = rays.map(|r| {
                    inner(r[0], r[1]).max(inner(r[0], r[2])).max(inner(r[1], r[2]))
                });
                ContextCheck {
                    members: self.context_ids(c).map(str::to_string),
                    max_deviation,
                }
            })
            .collect();
        let max_context_deviation = contexts
            .iter()
            .filter_map(|c| c.max_deviation)
            .fold(0.0, f64::max);
        let max_unit_deviation = observables
            .iter()
            .filter_map(|o| o.unit_deviation)
            .fold(0.0, f64::max);
        let unrealized = self.observables.iter().any(|o| o.realization.is_none());
        ValidationReport {
            pass: max_context_deviation <= tol && max_unit_deviation <= tol,
            unrealized,
            tol,
            max_context_deviation,
            max_unit_deviation,
            contexts,
            observables,
        }
    }

    /// Graphviz rendering. Contexts become labeled edge chains; with an
    /// assignment, value-1 observables are squares, value-0 observables
    /// circles, and undefined ones dashed circles.
    pub fn export_dot(&self, assignment: Option<&Assignment>) -> String {
        let mut out = String::from("graph diagram {\n");
        if !self.is_empty() {
            out.push_str("  node [shape=circle];\n");
        }
        for o in &self.observables {
            let mut attrs = vec![format!("label={}", quote(&o.id))];
            if let Some(a) = assignment {
                match a.get(&o.id) {
                    Some(Value::One) => attrs.push("shape=square".into()),
                    Some(Value::Zero) => attrs.push("shape=circle".into()),
                    None => attrs.push("shape=circle, style=dashed".into()),
                }
            }
            let _ = writeln!(out, "  {} [{}];", quote(&o.id), attrs.join(", "));
        }
        for (c, _) in self.contexts.iter().enumerate() {
            let [x, y, z] = self.context_ids(c);
            let _ = writeln!(
                out,
                "  {} -- {} -- {} [label=\"C{}\", colorscheme=set19, color={}];",
                quote(x),
                quote(y),
                quote(z),
                c,
                c % 9 + 1
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DiagramJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Diagram> {
        let raw: DiagramJson = serde_json::from_str(text)?;
        Diagram::try_from(raw)
    }

    /// Canonical form used for equality: observables sorted by id, contexts
    /// as sorted id triples in sorted order.
    #[allow(clippy::type_complexity)]
    fn canonical(&self) -> (Vec<(&str, Option<Ray>)>, BTreeSet<[&str; 3]>) {
        let mut obs: Vec<(&str, Option<Ray>)> = self
            .observables
            .iter()
            .map(|o| (o.id.as_str(), o.realization))
            .collect();
        obs.sort_by(|a, b| a.0.cmp(b.0));
        let ctx = (0..self.contexts.len())
            .map(|c| {
                let mut ids = self.context_ids(c);
                ids.sort();
                ids
            })
            .collect();
        (obs, ctx)
    }
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

fn quote(id: &str) -> String {
    let mut s = String::with_capacity(id.len() + 2);
    s.push('"');
    for ch in id.chars() {
        if ch == '"' || ch == '\\' {
            s.push('\\');
        }
        s.push(ch);
    }
    s.push('"');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextCheck {
    pub members: [String; 3],
    /// Largest pairwise overlap; `None` if some member is unrealized.
    #[serde(serialize_with = "ser_opt")]
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservableCheck {
    pub id: String,
    #[serde(serialize_with = "ser_opt")]
    pub unit_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub unrealized: bool,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub tol: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub max_context_deviation: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub max_unit_deviation: f64,
    pub contexts: Vec<ContextCheck>,
    pub observables: Vec<ObservableCheck>,
}

fn ser_opt<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => numfmt::ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableJson {
    id: String,
    vector: Option<Vector3>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DiagramJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    observables: Vec<ObservableJson>,
    contexts: Vec<[String; 3]>,
}

impl From<&Diagram> for DiagramJson {
    fn from(d: &Diagram) -> Self {
        DiagramJson {
            description: d.description.clone(),
            observables: d
                .observables
                .iter()
                .map(|o| ObservableJson {
                    id: o.id.clone(),
                    vector: o.realization.map(Ray::vector),
                })
                .collect(),
            contexts: (0..d.contexts.len())
                .map(|c| d.context_ids(c).map(str::to_string))
                .collect(),
        }
    }
}

impl TryFrom<DiagramJson> for Diagram {
    type Error = Error;

    fn try_from(raw: DiagramJson) -> Result<Diagram> {
        let mut d = Diagram::new();
        d.description = raw.description;
        for o in raw.observables {
            let ray = match o.vector {
                None => None,
                Some(v) => {
                    if !v.is_finite() {
                        return Err(Error::NonFinite(v.to_array()));
                    }
                    let norm = v.norm();
                    if (norm - 1.0).abs() > LOAD_UNIT_SLACK {
                        return Err(Error::NotUnit { norm, tol: LOAD_UNIT_SLACK });
                    }
                    // keep already-unit vectors bit-exact so files round-trip
                    if (norm - 1.0).abs() <= 1e-15 {
                        Some(Ray::new(v)?)
                    } else {
                        Some(Ray::normalize(v)?)
                    }
                }
            };
            d.add_observable(o.id, ray)?;
        }
        for ids in &raw.contexts {
            let members = [d.require(&ids[0])?, d.require(&ids[1])?, d.require(&ids[2])?];
            if d.has_context(members) && members.iter().collect::<BTreeSet<_>>().len() == 3 {
                return Err(Error::MalformedContext(format!("duplicate context {ids:?}")));
            }
            d.add_context_indices(members)?;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(x: f64, y: f64, z: f64) -> Ray {
        Ray::normalize(Vector3::new(x, y, z)).unwrap()
    }

    fn rays(list: &[(&str, Ray)]) -> Vec<(String, Ray)> {
        list.iter().map(|(i, r)| (i.to_string(), *r)).collect()
    }

    #[test]
    fn standard_basis_is_one_context() {
        let d = Diagram::from_rays(
            &rays(&[("a", ray(1., 0., 0.)), ("alpha", ray(0., 1., 0.)), ("beta", ray(0., 0., 1.))]),
            1e-9,
        )
        .unwrap();
        assert_eq!(d.contexts().len(), 1);
    }

    #[test]
    fn orthogonal_branch_contexts() {
        let (p, q) = (0.9_f64, (1.0 - 0.81_f64).sqrt());
        let d = Diagram::from_rays(
            &rays(&[
                ("a", ray(1., 0., 0.)),
                ("b", ray(p, q, 0.)),
                ("c", ray(q, -p, 0.)),
                ("alpha", ray(0., 1., 0.)),
                ("beta", ray(0., 0., 1.)),
            ]),
            1e-9,
        )
        .unwrap();
        let mut got: Vec<[&str; 3]> = (0..d.contexts().len())
            .map(|c| {
                let mut ids = d.context_ids(c);
                ids.sort();
                ids
            })
            .collect();
        got.sort();
        assert_eq!(got, vec![["a", "alpha", "beta"], ["b", "beta", "c"]]);
        let report = d.validate(1e-9);
        assert!(report.pass && !report.unrealized);
        assert!(report.max_context_deviation <= 1e-12);
    }

    #[test]
    fn non_orthogonal_rays_have_no_context() {
        let d = Diagram::from_rays(&rays(&[("u", ray(1., 0., 0.)), ("v", ray(1., 1., 0.))]), 1e-9)
            .unwrap();
        assert!(d.contexts().is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = ray(1., 0., 0.);
        assert_eq!(
            Diagram::from_rays(&rays(&[("x", r), ("x", r)]), 1e-9).unwrap_err(),
            Error::DuplicateId("x".into())
        );
    }

    #[test]
    fn validate_flags_parallel_members() {
        let mut d = Diagram::new();
        d.add_observable("o1", Some(ray(1., 0., 0.))).unwrap();
        d.add_observable("o2", Some(ray(1., 0., 0.))).unwrap();
        d.add_observable("o3", Some(ray(0., 0., 1.))).unwrap();
        d.add_context(["o1", "o2", "o3"]).unwrap();
        let r = d.validate(1e-9);
        assert!(!r.pass);
        assert_eq!(r.max_context_deviation, 1.0);
    }

    #[test]
    fn abstract_diagram_passes_vacuously() {
        let mut d = Diagram::new();
        for id in ["x", "y", "z"] {
            d.add_observable(id, None).unwrap();
        }
        d.add_context(["x", "y", "z"]).unwrap();
        let r = d.validate(1e-9);
        assert!(r.pass && r.unrealized);
        assert_eq!(r.contexts[0].max_deviation, None);
    }

    #[test]
    fn contexts_need_distinct_known_members() {
        let mut d = Diagram::new();
        d.add_observable("x", None).unwrap();
        d.add_observable("y", None).unwrap();
        assert!(matches!(d.add_context(["x", "x", "y"]), Err(Error::MalformedContext(_))));
        assert!(matches!(d.add_context(["x", "y", "w"]), Err(Error::UnknownId(_))));
    }

    #[test]
    fn dot_export_shapes() {
        let mut d = Diagram::new();
        for id in ["o1", "o2", "o3"] {
            d.add_observable(id, None).unwrap();
        }
        d.add_context(["o1", "o2", "o3"]).unwrap();
        let plain = d.export_dot(None);
        assert_eq!(plain.matches("[label=\"o").count(), 3);
        assert_eq!(plain.matches(" -- ").count(), 2);
        assert!(!plain.contains("square"));

        let mut a = Assignment::default();
        a.set("o1", Value::One);
        let dot = d.export_dot(Some(&a));
        assert!(dot.contains("\"o1\" [label=\"o1\", shape=square]"));
        assert!(dot.contains("\"o2\" [label=\"o2\", shape=circle"));
        assert!(dot.contains("\"o3\" [label=\"o3\", shape=circle"));
    }

    #[test]
    fn empty_diagram_dot() {
        assert_eq!(Diagram::new().export_dot(None), "graph diagram {\n}\n");
    }

    #[test]
    fn json_round_trip_and_duplicate_context_rejected() {
        let text = r#"{"observables":[{"id":"a","vector":[1,0,0]},{"id":"b","vector":null},{"id":"c","vector":null}],
                       "contexts":[["a","b","c"]]}"#;
        let d = Diagram::from_json(text).unwrap();
        let back = Diagram::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(d, back);

        let dup = r#"{"observables":[{"id":"a","vector":null},{"id":"b","vector":null},{"id":"c","vector":null}],
                      "contexts":[["a","b","c"],["c","b","a"]]}"#;
        assert!(matches!(Diagram::from_json(dup), Err(Error::MalformedContext(_))));
    }

    #[test]
    fn json_rejects_far_from_unit_vectors() {
        let text = r#"{"observables":[{"id":"a","vector":[2,0,0]}],"contexts":[]}"#;
        assert!(matches!(Diagram::from_json(text), Err(Error::NotUnit { .. })));
    }
}
