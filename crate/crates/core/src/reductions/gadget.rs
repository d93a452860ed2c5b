//! The reduction gadget and its realization.
//!
//! Seven observables `a, b, c, u, u_a, w, w_b` in three contexts
//!
//! ```text
//! {a, u, u_a}   {b, w, w_b}   {c, u, w}
//! ```
//!
//! `a = 1` zeroes `u`, `b = 1` zeroes `w`, and then `c` is the only member of
//! `{c, u, w}` left to take the value 1. With `u ∥ a×c` and `w ∥ c×u` the
//! diagram is orthogonally realizable iff `⟨a|b⟩ = ⟨a|c⟩⟨b|c⟩`.

use serde::{Deserialize, Serialize};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::vec3::{sqrt_clamped, PairFrame, Ray, Vector3};

/// Sign of the out-of-plane coordinate `z` of the reduced ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZBranch {
    #[default]
    Minus,
    Plus,
}

impl ZBranch {
    fn sign(self) -> f64 {
        match self {
            ZBranch::Minus => -1.0,
            ZBranch::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub c: Ray,
    /// `c` in the pair frame of `(a, b)`, where `a = (1,0,0)` and `b = (p,q,0)`.
    pub c_local: Vector3,
    /// The realized seven-observable gadget; ids `a, b, c, u, u_a, w, w_b`.
    pub gadget: Diagram,
}

/// Abstract topology of the reduction gadget.
pub fn reduction_topology() -> Diagram {
    let mut d = Diagram::new();
    for id in ["a", "b", "c", "u", "u_a", "w", "w_b"] {
        d.add_observable(id, None).expect("fresh ids");
    }
    for ctx in [["a", "u", "u_a"], ["b", "w", "w_b"], ["c", "u", "w"]] {
        d.add_context(ctx).expect("known ids");
    }
    d.description = Some("reduction gadget: a = b = 1 forces c = 1".into());
    d
}

/// Abstract topology of the iterated step: three reduction gadgets glued
/// along `(a, b) → v1`, `(a, v1) → v2`, `(b, v2) → c`.
pub fn iterated_topology() -> Diagram {
    let mut d = Diagram::new();
    let ids = [
        "a", "b", "c", "v1", "v2", "u1", "u1a", "w1", "w1b", "u2", "u2a", "w2", "w2b", "u3", "u3b", "w3", "w3b",
    ];
    for id in ids {
        d.add_observable(id, None).expect("fresh ids");
    }
    let contexts = [
        ["a", "u1", "u1a"],
        ["b", "w1", "w1b"],
        ["v1", "u1", "w1"],
        ["a", "u2", "u2a"],
        ["v1", "w2", "w2b"],
        ["v2", "u2", "w2"],
        ["b", "u3", "u3b"],
        ["v2", "w3", "w3b"],
        ["c", "u3", "w3"],
    ];
    for ctx in contexts {
        d.add_context(ctx).expect("known ids");
    }
    d.description = Some("iterated step: a = b = 1 forces v1, v2 and c to 1".into());
    d
}

/// Solves for the coordinates `(y, z)` of a reduced ray in `frame`, given
/// `x = ⟨e|c⟩` and `s = 1 − x²` (passed separately so callers can supply
/// `sin²θ`). Returns the ambient vector with `y` and `z`.
pub(crate) fn reduce_in_frame(frame: &PairFrame, x: f64, s: f64, branch: ZBranch) -> Result<(Vector3, f64, f64)> {
    let y = frame.p * s / (frame.q * x);
    let z = branch.sign() * sqrt_clamped(s - y * y, "z = √(1 − x² − y²)")?;
    Ok((frame.to_ambient(Vector3::new(x, y, z)), y, z))
}

/// Realizes the reduction of `(a, b)` at overlap `⟨a|c⟩ = x`.
///
/// Requires `⟨a|b⟩ < |x| < 1`. The sign of `x` is the sign of `c`'s
/// component along `a` in the pair frame.
pub fn reduce_toward(a: Ray, b: Ray, x: f64, branch: ZBranch) -> Result<Reduction> {
    let (av, s) = (a.vector(), a.vector().dot(b.vector()));
    let bv = if s < 0.0 { -b.vector() } else { b.vector() };
    let p = s.abs();
    if !(x.is_finite() && x.abs() > p && x.abs() < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "reduction needs ⟨a|b⟩ = {p} < |x| < 1, got x = {x}"
        )));
    }
    let frame = PairFrame::new(av, bv)?;
    let (cv, y, z) = reduce_in_frame(&frame, x, 1.0 - x * x, branch)?;
    let c = Ray::normalize(cv)?;
    let gadget = realize(&reduction_topology(), &[("a", a), ("b", b), ("c", c)], 1e-9)?;
    Ok(Reduction {
        c,
        c_local: Vector3::new(x, y, z),
        gadget,
    })
}

/// Realizes an abstract gadget from anchor rays.
///
/// Each unrealized observable is set to the normalized cross product of the
/// pair of realized co-context neighbours with the largest cross norm,
/// repeating until nothing changes. The result must pass
/// [`Diagram::validate`] at `tol`.
pub fn realize(topology: &Diagram, anchors: &[(&str, Ray)], tol: f64) -> Result<Diagram> {
    let mut d = topology.clone();
    for &(id, ray) in anchors {
        let i = d.require(id)?;
        d.set_realization(i, Some(ray));
    }
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); d.len()];
    for ctx in d.contexts() {
        for &m in ctx {
            for &o in ctx {
                if o != m && !neighbours[m].contains(&o) {
                    neighbours[m].push(o);
                }
            }
        }
    }
    loop {
        let mut progressed = false;
        for (i, around) in neighbours.iter().enumerate() {
            if d.realization(i).is_some() {
                continue;
            }
            let known: Vec<Vector3> = around
                .iter()
                .filter_map(|&n| d.realization(n).map(Ray::vector))
                .collect();
            let mut best: Option<Vector3> = None;
            for (j, &u) in known.iter().enumerate() {
                for &v in &known[j + 1..] {
                    let w = u.cross(v);
                    if best.is_none_or(|b| w.norm() > b.norm()) {
                        best = Some(w);
                    }
                }
            }
            if let Some(w) = best.filter(|w| w.norm() > 1e-9) {
                d.set_realization(i, Some(Ray::normalize(w)?));
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    if let Some(o) = d.observables().iter().find(|o| o.realization.is_none()) {
        return Err(Error::GadgetRealizationFailed(format!(
            "observable {} is not determined by its neighbours",
            o.id
        )));
    }
    let report = d.validate(tol);
    if !report.pass {
        return Err(Error::GadgetRealizationFailed(format!(
            "context deviation {:.3e} exceeds {tol:.1e}",
            report.max_context_deviation
        )));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignments::{exists_admissible, Premise, SolverConfig, Value};
    use crate::vec3::inner;

    fn pair(p: f64) -> (Ray, Ray) {
        let q = (1.0 - p * p).sqrt();
        (Ray::x_axis(), Ray::new(Vector3::new(p, q, 0.0)).unwrap())
    }

    #[test]
    fn overlaps_are_as_requested() {
        let (a, b) = pair(0.4);
        for x in [0.5, 0.9, -0.7] {
            let r = reduce_toward(a, b, x, ZBranch::Minus).unwrap();
            assert!((inner(a, r.c) - x.abs()).abs() < 1e-12);
            assert!((inner(b, r.c) - 0.4 / x.abs()).abs() < 1e-12);
            assert!(r.gadget.validate(1e-12).pass);
        }
    }

    #[test]
    fn branches_mirror_through_the_plane() {
        let (a, b) = pair(0.3);
        let m = reduce_toward(a, b, 0.6, ZBranch::Minus).unwrap();
        let p = reduce_toward(a, b, 0.6, ZBranch::Plus).unwrap();
        assert_eq!(m.c_local.z, -p.c_local.z);
        assert!(m.c_local.z < 0.0);
    }

    #[test]
    fn precondition() {
        let (a, b) = pair(0.5);
        for x in [0.5, 0.2, 1.0, f64::NAN] {
            assert!(matches!(
                reduce_toward(a, b, x, ZBranch::Minus),
                Err(Error::PreconditionViolated(_))
            ));
        }
    }

    #[test]
    fn gadget_forces_c() {
        let (a, b) = pair(0.5);
        let g = reduce_toward(a, b, 0.8, ZBranch::Minus).unwrap().gadget;
        let cfg = SolverConfig::default();
        let forced = [Premise::one("a"), Premise::one("b"), Premise::value("c", Value::Zero)];
        assert!(!exists_admissible(&g, &forced, &cfg).unwrap().is_satisfiable());
        assert!(exists_admissible(&g, &[Premise::one("a"), Premise::one("b")], &cfg)
            .unwrap()
            .is_satisfiable());
    }

    #[test]
    fn unrealizable_topology_is_reported() {
        let mut d = Diagram::new();
        for id in ["a", "b", "c"] {
            d.add_observable(id, None).unwrap();
        }
        d.add_context(["a", "b", "c"]).unwrap();
        let err = realize(&d, &[("a", Ray::x_axis())], 1e-9).unwrap_err();
        assert!(matches!(err, Error::GadgetRealizationFailed(_)));
    }

    #[test]
    fn iterated_topology_shape() {
        let d = iterated_topology();
        assert_eq!(d.len(), 17);
        assert_eq!(d.contexts().len(), 9);
    }
}
