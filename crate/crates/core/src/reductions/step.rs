//! One iterated-reduction step and the overlap map `f`.
//!
//! In the canonical basis `a = (1,0,0)`, `b = (p1,q1,0)`:
//!
//! 1. `v1` is the reduction of `(a, b)` at overlap `x1 = cos(α1·θ_ab)`;
//! 2. `v2` is the reduction of `(a, v1)` at `x2 = cos(α2·θ_av1)`;
//! 3. `c` is the reduction of `(b, v2)` at `x3 = cos(α3·θ_bv2)`.
//!
//! Each stage lives in the right-handed frame `(e, f, e×f)` of its pair.
//! Stage 1 takes `+z`, stage 3 `−z`. Stage 2 also takes `+z` here: the
//! usual change of basis for that stage has `g2 = (0, z1/q2, −y1/q2)`,
//! which is `f2×e2`, so its `(x2, y2, −z2)` is `+z2` in a right-handed frame.
//! `v2` is mapped back with the second stage's change of basis `T2`, not the
//! first stage's `T1`.

use serde::{Deserialize, Serialize};

use super::gadget::{iterated_topology, realize, reduce_in_frame, ZBranch};
use crate::diagram::Diagram;
use super::{alpha1, alpha2, alpha3, strong_upper};
use crate::error::{Error, Result};
use crate::numfmt::ser_f64;
use crate::vec3::{acos_clamped, inner, sqrt_clamped, PairFrame, Ray, Vector3};

/// Every intermediate quantity of one step, in the caller's basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub a: Ray,
    pub b: Ray,
    #[serde(serialize_with = "ser_f64")]
    pub p1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub q1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub alpha1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub alpha2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub alpha3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_ab: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_av1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_av2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_bv2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_bc: f64,
    #[serde(serialize_with = "ser_f64")]
    pub x1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub y1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub z1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub q2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub x2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub y2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub z2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub p3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub q3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub k: f64,
    #[serde(serialize_with = "ser_f64")]
    pub x3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub y3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub z3: f64,
    pub v1: Ray,
    pub v2: Ray,
    pub c: Ray,
}

impl ReductionTrace {
    /// `⟨a|c⟩`, i.e. `f(p1)`.
    pub fn overlap_ac(&self) -> f64 {
        inner(self.a, self.c)
    }

    /// The realized seventeen-observable gadget of this step.
    pub fn gadget(&self, tol: f64) -> Result<Diagram> {
        let anchors = [("a", self.a), ("b", self.b), ("v1", self.v1), ("v2", self.v2), ("c", self.c)];
        realize(&iterated_topology(), &anchors, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Accept any `0 < ⟨a|b⟩ < 1` instead of `3/√14 < ⟨a|b⟩ < 1`.
    pub relax_lower_bound: bool,
    /// Maximum chain length for [`iterate_reduction_with`].
    pub iteration_budget: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            relax_lower_bound: false,
            iteration_budget: 1_000_000,
        }
    }
}

impl StepConfig {
    pub fn relaxed() -> Self {
        StepConfig {
            relax_lower_bound: true,
            ..Default::default()
        }
    }
}

fn check_p1(p1: f64, cfg: &StepConfig) -> Result<()> {
    let lower = if cfg.relax_lower_bound { 0.0 } else { strong_upper() };
    if !(p1 > lower && p1 < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "overlap {p1} outside ({lower}, 1)"
        )));
    }
    Ok(())
}

pub fn iterated_step(a: Ray, b: Ray) -> Result<ReductionTrace> {
    iterated_step_with(a, b, &StepConfig::default())
}

pub fn iterated_step_with(a: Ray, b: Ray, cfg: &StepConfig) -> Result<ReductionTrace> {
    let (av, s) = (a.vector(), a.vector().dot(b.vector()));
    let bv = if s < 0.0 { -b.vector() } else { b.vector() };
    let p1 = s.abs();
    check_p1(p1, cfg)?;
    let (al1, al2, al3) = (alpha1(), alpha2(), alpha3());

    let frame1 = PairFrame::new(av, bv)?;
    let q1 = frame1.q;
    let theta_ab = acos_clamped(p1, "θ_ab")?;
    let theta_av1 = al1 * theta_ab;
    let theta_av2 = al2 * theta_av1;
    let (x1, y1, z1, v1) = stage(&frame1, theta_av1, ZBranch::Plus)?;

    let frame2 = PairFrame::new(av, v1)?;
    let q2 = frame2.q;
    let (x2, y2, z2, v2) = stage(&frame2, theta_av2, ZBranch::Plus)?;

    let p3 = bv.dot(v2);
    if p3 <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "⟨b|v2⟩ = {p3} is not positive; the third reduction is undefined"
        )));
    }
    let theta_bv2 = acos_clamped(p3, "θ_bv2")?;
    let theta_bc = al3 * theta_bv2;
    let frame3 = PairFrame::new(bv, v2)?;
    let q3 = frame3.q;
    let k = (v2 - bv * p3).norm();
    let (x3, y3, z3, c) = stage(&frame3, theta_bc, ZBranch::Minus)?;

    Ok(ReductionTrace {
        a,
        b,
        p1,
        q1,
        alpha1: al1,
        alpha2: al2,
        alpha3: al3,
        theta_ab,
        theta_av1,
        theta_av2,
        theta_bv2,
        theta_bc,
        x1,
        y1,
        z1,
        q2,
        x2,
        y2,
        z2,
        p3,
        q3,
        k,
        x3,
        y3,
        z3,
        v1: Ray::normalize(v1)?,
        v2: Ray::normalize(v2)?,
        c: Ray::normalize(c)?,
    })
}

/// Reduction at angle `theta` from the frame's first vector; returns
/// `(x, y, z, vector)`.
fn stage(frame: &PairFrame, theta: f64, branch: ZBranch) -> Result<(f64, f64, f64, Vector3)> {
    let x = theta.cos();
    if !(x > frame.p.abs() && x < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "stage overlap {x} not in ({}, 1)",
            frame.p.abs()
        )));
    }
    let (v, y, z) = reduce_in_frame(frame, x, theta.sin().powi(2), branch)?;
    Ok((x, y, z, v))
}

/// `f(p1) = ⟨a|c⟩` for one iterated step, from the closed-form constants.
///
/// Requires `3/√14 < p1 < 1`.
pub fn f_of(p1: f64) -> Result<f64> {
    check_p1(p1, &StepConfig::default())?;
    f_unchecked(p1)
}

/// [`f_of`] without the lower bound; fails only where the construction itself
/// breaks down (negative radicands, `⟨b|v2⟩ ≤ 0`).
pub fn f_unchecked(p1: f64) -> Result<f64> {
    check_p1(p1, &StepConfig::relaxed())?;
    let (al1, al2, al3) = (alpha1(), alpha2(), alpha3());
    let q1 = sqrt_clamped(1.0 - p1 * p1, "q1")?;
    let theta_ab = acos_clamped(p1, "θ_ab")?;
    let t1 = al1 * theta_ab;
    let t2 = al2 * t1;
    // 1 − cos²θ evaluated as sin²θ to keep precision as p1 → 1
    let (x1, s1) = (t1.cos(), t1.sin().powi(2));
    let y1 = p1 * s1 / (q1 * x1);
    let z1 = sqrt_clamped(s1 - y1 * y1, "z1")?;
    let q2 = s1.sqrt();
    let (x2, s2) = (t2.cos(), t2.sin().powi(2));
    let y2 = x1 * s2 / (q2 * x2);
    let z2 = sqrt_clamped(s2 - y2 * y2, "z2")?;
    let p3 = p1 * x2 + q1 * (y1 * y2 - z1 * z2) / q2;
    if p3 <= 0.0 {
        return Err(Error::PreconditionViolated(format!("⟨b|v2⟩ = {p3} is not positive")));
    }
    let q3 = sqrt_clamped(1.0 - p3 * p3, "q3")?;
    let t3 = al3 * acos_clamped(p3, "θ_bv2")?;
    let (x3, s3) = (t3.cos(), t3.sin().powi(2));
    let y3 = p3 * s3 / (q3 * x3);
    let z3 = sqrt_clamped(s3 - y3 * y3, "z3")?;
    let k = ((x2 - p3 * p1).powi(2)
        + ((y1 * y2 - z1 * z2) / q2 - p3 * q1).powi(2)
        + ((y2 * z1 + y1 * z2) / q2).powi(2))
    .sqrt();
    Ok(x3 * p1 + y3 / k * (x2 - p1 * p3) - q1 * z3 / (k * q2) * (y2 * z1 + y1 * z2))
}

/// Chain of steps `(a, b) → c_1`, `(a, c_1) → c_2`, … ending at the first
/// `⟨a|c_k⟩ ≤ 3/√14`. Consecutive steps share their rays directly: each
/// `c_i` is the next step's `b`, with no extra gadget in between.
pub fn iterate_reduction(a: Ray, b: Ray) -> Result<Vec<ReductionTrace>> {
    iterate_reduction_with(a, b, strong_upper(), &StepConfig::default())
}

/// Chain of steps ending at the first `⟨a|c_k⟩ ≤ target`.
pub fn iterate_reduction_with(a: Ray, b: Ray, target: f64, cfg: &StepConfig) -> Result<Vec<ReductionTrace>> {
    let mut chain = Vec::new();
    let mut current = b;
    loop {
        if chain.len() >= cfg.iteration_budget {
            return Err(Error::IterationBudgetExceeded(cfg.iteration_budget));
        }
        let trace = iterated_step_with(a, current, cfg)?;
        let overlap = trace.overlap_ac();
        current = trace.c;
        chain.push(trace);
        if overlap <= target {
            return Ok(chain);
        }
    }
}
