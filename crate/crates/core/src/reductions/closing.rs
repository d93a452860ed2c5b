//! A constructive strong Kochen-Specker gadget.
//!
//! The iterated step stays well defined below `3/√14` all the way down to the
//! zero `p*` of `f`, where it maps the pair `(a, b)` to a ray `c ⊥ a`.
//! Starting from any overlap we step down while above `p*`, reduce back up to
//! exactly `p*`, take one last step and close with the context
//! `{a, c, a×c}`. On the resulting set `a = 1` and `b = 1` are incompatible.
//! A second chain through a ray `c⊥` handles `b = 0`.

use std::sync::OnceLock;

use super::gadget::{reduce_toward, ZBranch};
use super::step::{f_unchecked, iterated_step_with, ReductionTrace, StepConfig};
use super::witness::WitnessBuilder;
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::vec3::{inner, PairFrame, Ray, Vector3};

/// Overlaps this close to `0` count as orthogonal when closing.
const CLOSE_EPS: f64 = 1e-10;
/// Overlaps this close to `p*` take the final step directly.
const AT_ZERO_EPS: f64 = 1e-12;
const MAX_LINKS: usize = 100_000;

/// The zero `p*` of the overlap map `f`, about `0.4349`.
pub fn zero_crossing() -> f64 {
    static P: OnceLock<f64> = OnceLock::new();
    *P.get_or_init(|| {
        let (mut lo, mut hi) = (0.40_f64, 0.50_f64);
        let g = |p: f64| f_unchecked(p).expect("f is defined on [0.40, 0.50]");
        debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if g(lo).abs() < g(hi).abs() {
            lo
        } else {
            hi
        }
    })
}

/// Adds the links making `{a = 1, c = 1}` contradictory; returns the
/// iterated steps used.
pub fn closing_gadget(w: &mut WitnessBuilder, a: usize, c: usize) -> Result<Vec<ReductionTrace>> {
    let relaxed = StepConfig::relaxed();
    let pstar = zero_crossing();
    let ar = w.ray(a);
    let mut cur = c;
    let mut steps = Vec::new();
    for link in 0..MAX_LINKS {
        let r = inner(ar, w.ray(cur));
        if r <= CLOSE_EPS {
            let perp = Ray::normalize(ar.vector().cross(w.ray(cur).vector()))?;
            let k = w.intern(perp, "close")?;
            w.context([a, cur, k])?;
            return Ok(steps);
        }
        if r < pstar - AT_ZERO_EPS {
            let red = reduce_toward(ar, w.ray(cur), pstar, ZBranch::Minus)?;
            let map = w.embed(&red.gadget, &format!("k{link}_"), &[("a", a), ("b", cur)])?;
            cur = map[red.gadget.require("c")?];
            continue;
        }
        let trace = iterated_step_with(ar, w.ray(cur), &relaxed)?;
        let g = trace.gadget(w.tolerance())?;
        let map = w.embed(&g, &format!("k{link}_"), &[("a", a), ("b", cur)])?;
        cur = map[g.require("c")?];
        steps.push(trace);
    }
    Err(Error::IterationBudgetExceeded(MAX_LINKS))
}

/// Adds `α, β, c⊥` with contexts `{a, α, β}` and `{b, c⊥, β}`, so that
/// `a = 1, b = 0` forces `c⊥ = 1`. `⟨a|c⊥⟩ = √(1 − ⟨a|b⟩²)`.
pub(crate) fn zero_branch(w: &mut WitnessBuilder, a: usize, b: usize) -> Result<(usize, [[usize; 3]; 2])> {
    let (av, bv) = (w.ray(a).vector(), w.ray(b).vector());
    let bv = if av.dot(bv) < 0.0 { -bv } else { bv };
    let fr = PairFrame::new(av, bv)?;
    let alpha = w.intern(Ray::normalize(fr.f)?, "alpha")?;
    let beta = w.intern(Ray::normalize(fr.g)?, "beta")?;
    let perp = w.intern(Ray::normalize(fr.e * fr.q - fr.f * fr.p)?, "c_perp")?;
    let c1 = [a, alpha, beta];
    let c2 = [b, perp, beta];
    w.context(c1)?;
    w.context(c2)?;
    Ok((perp, [c1, c2]))
}

/// Strong Kochen-Specker set for `a = (1,0,0)`, `b = (p, √(1−p²), 0)`: no
/// admissible assignment has `a = 1` and `b` defined.
pub fn constructed_strong_gadget(p: f64) -> Result<Diagram> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegeneratePair { overlap: p });
    }
    let q = (1.0 - p * p).sqrt();
    let mut w = WitnessBuilder::new();
    let a = w.intern(Ray::x_axis(), "a")?;
    let b = w.intern(Ray::normalize(Vector3::new(p, q, 0.0))?, "b")?;
    closing_gadget(&mut w, a, b)?;
    let (perp, _) = zero_branch(&mut w, a, b)?;
    closing_gadget(&mut w, a, perp)?;
    let mut d = w.finish();
    d.description = Some(format!(
        "constructed strong Kochen-Specker gadget at overlap {}",
        crate::numfmt::fmt17(p)
    ));
    Ok(d)
}
