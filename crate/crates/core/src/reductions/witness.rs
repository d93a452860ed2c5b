//! Extended value-indefiniteness witnesses.
//!
//! For rays `a`, `b` with `0 < ⟨a|b⟩ < 1` the witness is a finite realized
//! diagram on which every admissible assignment with `a = 1` leaves `b`
//! undefined:
//!
//! * `b = 1`: iterated steps force `c_1, …, c_k` to 1 until
//!   `⟨a|c_k⟩ ≤ 3/√14`, then a strong gadget on `(a, c_k)` rules `c_k = 1` out;
//! * `b = 0`: contexts `{a, α, β}`, `{b, c⊥, β}` force `c⊥ = 1`, and the
//!   same chain from `(a, c⊥)` rules that out.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use super::closing::{closing_gadget, zero_branch};
use super::gadget::{reduce_toward, ZBranch};
use super::step::{iterate_reduction_with, ReductionTrace, StepConfig};
use super::{strong_lower, strong_upper};
use crate::assignments::{check_value_indefinite, SolverConfig};
use crate::diagram::{Diagram, DiagramJson};
use crate::error::{Error, Result};
use crate::vec3::{apply, inner, pair_rotation, Matrix3, Ray};

/// Accumulates a realized diagram, merging observables with equal rays.
#[derive(Debug, Clone)]
pub struct WitnessBuilder {
    diagram: Diagram,
    tol: f64,
}

impl Default for WitnessBuilder {
    fn default() -> Self {
        WitnessBuilder::new()
    }
}

impl WitnessBuilder {
    pub fn new() -> Self {
        WitnessBuilder::with_tolerance(1e-9)
    }

    /// `tol` is both the ray-merging threshold (`‖u×v‖`) and the validation
    /// tolerance for embedded gadgets.
    pub fn with_tolerance(tol: f64) -> Self {
        WitnessBuilder {
            diagram: Diagram::new(),
            tol,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn ray(&self, i: usize) -> Ray {
        self.diagram.realization(i).expect("builder observables are realized")
    }

    /// Index of the observable realized by `ray`, adding it under a fresh id
    /// derived from `hint` if none exists.
    pub fn intern(&mut self, ray: Ray, hint: &str) -> Result<usize> {
        if let Some(i) = (0..self.diagram.len()).find(|&i| self.ray(i).same_as(ray, self.tol)) {
            return Ok(i);
        }
        let mut id = hint.to_string();
        let mut n = 1;
        while self.diagram.index_of(&id).is_some() {
            n += 1;
            id = format!("{hint}#{n}");
        }
        self.diagram.add_observable(id, Some(ray))
    }

    pub fn context(&mut self, members: [usize; 3]) -> Result<usize> {
        self.diagram.add_context_indices(members)
    }

    /// Copies a realized gadget in. Observables named in `pinned` map to the
    /// given indices; the rest are interned by ray with ids `prefix + id`.
    /// Returns the index map, gadget index → builder index.
    pub fn embed(&mut self, gadget: &Diagram, prefix: &str, pinned: &[(&str, usize)]) -> Result<Vec<usize>> {
        let mut map = Vec::with_capacity(gadget.len());
        for o in gadget.observables() {
            let i = match pinned.iter().find(|(id, _)| *id == o.id) {
                Some(&(_, i)) => i,
                None => {
                    let ray = o
                        .realization
                        .ok_or_else(|| Error::GadgetRealizationFailed(format!("{} is unrealized", o.id)))?;
                    self.intern(ray, &format!("{prefix}{}", o.id))?
                }
            };
            map.push(i);
        }
        for ctx in gadget.contexts() {
            self.context(ctx.map(|m| map[m]))?;
        }
        Ok(map)
    }

    pub fn finish(self) -> Diagram {
        self.diagram
    }
}

/// The gadget closing a chain.
#[derive(Debug, Clone, Default)]
pub enum StrongGadget {
    /// Built on the fly by [`closing_gadget`].
    #[default]
    Constructed,
    /// A realized strong Kochen-Specker set with observables `a`, `b` at the
    /// given overlap, transported onto each chain end.
    Data { diagram: Diagram, overlap: f64 },
    /// No gadget: the witness only contains the forcing chains.
    Absent,
}

impl StrongGadget {
    /// Accepts a data gadget after checking that `a` and `b` are realized
    /// with overlap in `[√(5/14), 3/√14]`, the realization validates at
    /// `tol`, and `{a = 1, b definite}` has no admissible assignment.
    pub fn from_data(diagram: Diagram, tol: f64, cfg: &SolverConfig) -> Result<StrongGadget> {
        let (a, b) = match (diagram.ray_of("a"), diagram.ray_of("b")) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::GadgetRealizationFailed(
                    "strong gadget needs realized observables a and b".into(),
                ))
            }
        };
        let overlap = inner(a, b);
        if overlap < strong_lower() - tol || overlap > strong_upper() + tol {
            return Err(Error::GadgetRealizationFailed(format!(
                "gadget overlap {overlap} outside [√(5/14), 3/√14]"
            )));
        }
        let report = diagram.validate(tol);
        if !report.pass {
            return Err(Error::GadgetRealizationFailed(format!(
                "gadget fails validation: deviation {:.3e}",
                report.max_context_deviation.max(report.max_unit_deviation)
            )));
        }
        if !check_value_indefinite(&diagram, "a", "b", cfg)? {
            return Err(Error::GadgetRealizationFailed(
                "gadget admits an assignment with a = 1 and b defined".into(),
            ));
        }
        Ok(StrongGadget::Data { diagram, overlap })
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrongGadget::Constructed => "constructed",
            StrongGadget::Data { .. } => "data",
            StrongGadget::Absent => "absent",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessConfig {
    pub gadget: StrongGadget,
    /// Run the solver on the finished diagram.
    pub certify: bool,
    pub tol: f64,
    pub solver: SolverConfig,
    pub step: StepConfig,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            gadget: StrongGadget::Constructed,
            certify: true,
            tol: 1e-9,
            solver: SolverConfig::default(),
            step: StepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certification {
    /// The solver found no admissible assignment with `a = 1`, `b` defined.
    Verified,
    /// The solver found one.
    Refuted,
    /// Not checked.
    Unchecked,
    /// Built without a strong gadget; only the forcing chains are present.
    Incomplete,
}

#[derive(Debug, Clone)]
pub struct WitnessSet {
    pub diagram: Diagram,
    pub a_id: String,
    pub b_id: String,
    /// Iterated steps from `(a, b)` down to the strong-gadget window.
    pub chain: Vec<ReductionTrace>,
    /// The two contexts of the `b = 0` branch, empty without a gadget.
    pub branch_contexts: Vec<[String; 3]>,
    pub certification: Certification,
}

impl WitnessSet {
    pub fn to_json(&self) -> Result<String> {
        let mut obj = match serde_json::to_value(DiagramJson::from(&self.diagram))? {
            Json::Object(m) => m,
            _ => unreachable!("diagrams serialize as objects"),
        };
        obj.insert("a".into(), Json::String(self.a_id.clone()));
        obj.insert("b".into(), Json::String(self.b_id.clone()));
        obj.insert("certification".into(), serde_json::to_value(self.certification)?);
        obj.insert("branch_contexts".into(), serde_json::to_value(&self.branch_contexts)?);
        // chain entries carry 17-digit raw numbers, so splice them in as text
        let mut text = serde_json::to_string_pretty(&Json::Object(obj))?;
        let chain = serde_json::to_string_pretty(&self.chain)?;
        let tail = text.rfind('}').expect("object");
        text.truncate(tail);
        while text.ends_with(char::is_whitespace) {
            text.pop();
        }
        text.push_str(",\n  \"chain\": ");
        text.push_str(&chain.replace('\n', "\n  "));
        text.push_str("\n}");
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<WitnessSet> {
        let mut obj: Map<String, Json> = serde_json::from_str(text)?;
        let mut take = |k: &str| obj.remove(k).ok_or_else(|| Error::Data(format!("witness JSON lacks \"{k}\"")));
        let a_id: String = serde_json::from_value(take("a")?)?;
        let b_id: String = serde_json::from_value(take("b")?)?;
        let certification = serde_json::from_value(take("certification")?)?;
        let branch_contexts = serde_json::from_value(take("branch_contexts")?)?;
        let chain = serde_json::from_value(take("chain")?)?;
        let raw: DiagramJson = serde_json::from_value(Json::Object(obj))?;
        let diagram = Diagram::try_from(raw)?;
        diagram.require(&a_id)?;
        diagram.require(&b_id)?;
        Ok(WitnessSet {
            diagram,
            a_id,
            b_id,
            chain,
            branch_contexts,
            certification,
        })
    }
}

fn rotated(d: &Diagram, m: &Matrix3) -> Result<Diagram> {
    let mut out = d.clone();
    for i in 0..d.len() {
        if let Some(r) = d.realization(i) {
            out.set_realization(i, Some(Ray::normalize(apply(m, r.vector()))?));
        }
    }
    Ok(out)
}

fn signed_toward(a: Ray, b: Ray) -> crate::vec3::Vector3 {
    if a.vector().dot(b.vector()) < 0.0 {
        -b.vector()
    } else {
        b.vector()
    }
}

/// Adds a strong gadget making `{a = 1, c = 1}` contradictory.
fn forbid_one(w: &mut WitnessBuilder, a: usize, c: usize, cfg: &WitnessConfig, tag: &str) -> Result<()> {
    match &cfg.gadget {
        StrongGadget::Absent => Ok(()),
        StrongGadget::Constructed => closing_gadget(w, a, c).map(|_| ()),
        StrongGadget::Data { diagram, overlap } => {
            let ar = w.ray(a);
            let mut cur = c;
            if inner(ar, w.ray(cur)) > overlap + 1e-12 {
                let relaxed = StepConfig { relax_lower_bound: true, ..cfg.step };
                for (k, t) in iterate_reduction_with(ar, w.ray(cur), *overlap, &relaxed)?.iter().enumerate() {
                    let g = t.gadget(w.tolerance())?;
                    let map = w.embed(&g, &format!("{tag}d{k}_"), &[("a", a), ("b", cur)])?;
                    cur = map[g.require("c")?];
                }
            }
            if inner(ar, w.ray(cur)) < overlap - 1e-12 {
                let red = reduce_toward(ar, w.ray(cur), *overlap, ZBranch::Minus)?;
                let map = w.embed(&red.gadget, &format!("{tag}r_"), &[("a", a), ("b", cur)])?;
                cur = map[red.gadget.require("c")?];
            }
            let (ga, gb) = (diagram.ray_of("a").expect("gated"), diagram.ray_of("b").expect("gated"));
            let m = pair_rotation(ga.vector(), signed_toward(ga, gb), ar.vector(), signed_toward(ar, w.ray(cur)))?;
            w.embed(&rotated(diagram, &m)?, &format!("{tag}g_"), &[("a", a), ("b", cur)])?;
            Ok(())
        }
    }
}

/// Steps `(a, c)` down to `⟨a|c_k⟩ ≤ 3/√14`, then forbids `c_k = 1`.
fn chain_and_close(
    w: &mut WitnessBuilder,
    a: usize,
    c: usize,
    cfg: &WitnessConfig,
    tag: &str,
) -> Result<Vec<ReductionTrace>> {
    let mut cur = c;
    let mut chain = Vec::new();
    if inner(w.ray(a), w.ray(c)) > strong_upper() {
        chain = iterate_reduction_with(w.ray(a), w.ray(c), strong_upper(), &cfg.step)?;
        for (k, t) in chain.iter().enumerate() {
            let g = t.gadget(w.tolerance())?;
            let map = w.embed(&g, &format!("{tag}s{}_", k + 1), &[("a", a), ("b", cur)])?;
            cur = map[g.require("c")?];
        }
    }
    forbid_one(w, a, cur, cfg, tag)?;
    Ok(chain)
}

/// Builds and (optionally) certifies the witness for `a`, `b`.
pub fn construct_extended_witness(a: Ray, b: Ray, cfg: &WitnessConfig) -> Result<WitnessSet> {
    let p = inner(a, b);
    if !(p > cfg.tol && p < 1.0 - cfg.tol) {
        return Err(Error::DegeneratePair { overlap: p });
    }
    let mut w = WitnessBuilder::with_tolerance(cfg.tol);
    let ia = w.intern(a, "a")?;
    let ib = w.intern(b, "b")?;
    let chain = chain_and_close(&mut w, ia, ib, cfg, "")?;
    let mut branch_contexts = Vec::new();
    if !matches!(cfg.gadget, StrongGadget::Absent) {
        let (perp, ctxs) = zero_branch(&mut w, ia, ib)?;
        chain_and_close(&mut w, ia, perp, cfg, "z")?;
        let d = w.diagram();
        branch_contexts = ctxs.iter().map(|c| c.map(|m| d.id(m).to_string())).collect();
    }
    let mut diagram = w.finish();
    diagram.description = Some(format!(
        "extended witness at overlap {} ({} strong gadget)",
        crate::numfmt::fmt17(p),
        cfg.gadget.name()
    ));
    let (a_id, b_id) = (diagram.id(ia).to_string(), diagram.id(ib).to_string());
    let certification = match (&cfg.gadget, cfg.certify) {
        (StrongGadget::Absent, _) => Certification::Incomplete,
        (_, false) => Certification::Unchecked,
        (_, true) => {
            if diagram.validate(cfg.tol).pass && check_value_indefinite(&diagram, &a_id, &b_id, &cfg.solver)? {
                Certification::Verified
            } else {
                Certification::Refuted
            }
        }
    };
    Ok(WitnessSet {
        diagram,
        a_id,
        b_id,
        chain,
        branch_contexts,
        certification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vector3;

    fn pair(p: f64) -> (Ray, Ray) {
        let q = (1.0 - p * p).sqrt();
        (Ray::x_axis(), Ray::new(Vector3::new(p, q, 0.0)).unwrap())
    }

    #[test]
    fn builder_merges_equal_rays() {
        let mut w = WitnessBuilder::new();
        let i = w.intern(Ray::x_axis(), "x").unwrap();
        let j = w.intern(Ray::normalize(Vector3::new(-1.0, 1e-12, 0.0)).unwrap(), "y").unwrap();
        let k = w.intern(Ray::normalize(Vector3::Y).unwrap(), "x").unwrap();
        assert_eq!(i, j);
        assert_ne!(i, k);
        assert_eq!(w.diagram().id(k), "x#2");
    }

    #[test]
    fn witness_at_point_nine() {
        let (a, b) = pair(0.9);
        let ws = construct_extended_witness(a, b, &WitnessConfig::default()).unwrap();
        assert_eq!(ws.chain.len(), 3);
        assert_eq!(ws.certification, Certification::Verified);
        assert_eq!(ws.branch_contexts.len(), 2);
        assert!(ws.diagram.validate(1e-9).pass);
    }

    #[test]
    fn witness_below_window() {
        let (a, b) = pair(0.5);
        let ws = construct_extended_witness(a, b, &WitnessConfig::default()).unwrap();
        assert!(ws.chain.is_empty());
        assert_eq!(ws.certification, Certification::Verified);
    }

    #[test]
    fn absent_gadget_is_incomplete() {
        let (a, b) = pair(0.9);
        let cfg = WitnessConfig {
            gadget: StrongGadget::Absent,
            ..Default::default()
        };
        let ws = construct_extended_witness(a, b, &cfg).unwrap();
        assert_eq!(ws.certification, Certification::Incomplete);
        assert!(!check_value_indefinite(&ws.diagram, "a", "b", &SolverConfig::default()).unwrap());
    }

    #[test]
    fn data_gadget_is_transported() {
        let g = super::super::constructed_strong_gadget(0.7).unwrap();
        let cfg = WitnessConfig {
            gadget: StrongGadget::from_data(g, 1e-9, &SolverConfig::default()).unwrap(),
            ..Default::default()
        };
        for p in [0.3, 0.75, 0.9] {
            let (a, b) = pair(p);
            let ws = construct_extended_witness(a, b, &cfg).unwrap();
            assert_eq!(ws.certification, Certification::Verified, "p = {p}");
        }
    }

    #[test]
    fn gate_rejects_weak_gadgets() {
        let cfg = SolverConfig::default();
        let (a, b) = pair(0.7);
        let weak = reduce_toward(a, b, 0.8, ZBranch::Minus).unwrap().gadget;
        assert!(StrongGadget::from_data(weak, 1e-9, &cfg).is_err());
        let far = super::super::constructed_strong_gadget(0.3).unwrap();
        assert!(StrongGadget::from_data(far, 1e-9, &cfg).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (a, b) = pair(0.85);
        let ws = construct_extended_witness(a, b, &WitnessConfig::default()).unwrap();
        let text = ws.to_json().unwrap();
        let back = WitnessSet::from_json(&text).unwrap();
        assert_eq!(back.diagram, ws.diagram);
        assert_eq!(back.chain.len(), ws.chain.len());
        assert_eq!(back.chain[0].p1, ws.chain[0].p1);
        assert_eq!(back.certification, ws.certification);
        assert!(Diagram::from_json(&text).is_err());
    }
}
