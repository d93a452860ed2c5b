//! Numerical checks of the overlap map `f`, the star-set classifier, and a
//! Monte Carlo estimate of the value-definite fraction of the sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::{fmt17, ser_f64};
use crate::par::{map_indices, Jobs};
use crate::reductions::{f_of, f_unchecked, strong_upper};
use crate::vec3::{inner, Ray, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_f64")]
    pub p1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub f: f64,
    /// Central-difference `df/dp1`.
    #[serde(serialize_with = "ser_f64")]
    pub df: f64,
    /// `p1 − f`.
    #[serde(serialize_with = "ser_f64")]
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotBelowDiagonal,
    SlopeNotAboveOne,
    GapNotDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub violations: Vec<Violation>,
}

impl Sweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p1,f,df,gap\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", fmt17(r.p1), fmt17(r.f), fmt17(r.df), fmt17(r.gap)));
        }
        out
    }
}

/// `n` evenly spaced rows on `[lo, hi]`, `3/√14 ≤ lo < hi < 1`.
pub fn sweep_f(lo: f64, hi: f64, n: usize) -> Result<Sweep> {
    sweep_f_with(lo, hi, n, Jobs::SEQUENTIAL)
}

pub fn sweep_f_with(lo: f64, hi: f64, n: usize, jobs: Jobs) -> Result<Sweep> {
    // tiny slack so a caller may pass a rounded 3/√14
    if !(lo >= strong_upper() - 1e-15 && lo < hi && hi < 1.0 && n >= 2) {
        return Err(Error::PreconditionViolated(format!(
            "sweep needs 3/√14 ≤ lo < hi < 1 and n ≥ 2, got lo = {lo}, hi = {hi}, n = {n}"
        )));
    }
    let spacing = (hi - lo) / (n - 1) as f64;
    let h = (spacing / 10.0).min(1e-6);
    if hi + h >= 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "hi = {hi} leaves no room for the difference step {h}"
        )));
    }
    let rows = map_indices(n, jobs, |i| -> Result<SweepRow> {
        let p1 = if i == n - 1 { hi } else { lo + spacing * i as f64 };
        let f = f_unchecked(p1)?;
        let df = (f_unchecked(p1 + h)? - f_unchecked(p1 - h)?) / (2.0 * h);
        Ok(SweepRow { p1, f, df, gap: p1 - f })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    // Negated so that NaN rows count as violations.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    for (i, r) in rows.iter().enumerate() {
        if !(r.f < r.p1) {
            violations.push(Violation { row: i, kind: ViolationKind::NotBelowDiagonal });
        }
        if !(r.df > 1.0) {
            violations.push(Violation { row: i, kind: ViolationKind::SlopeNotAboveOne });
        }
        if i > 0 && !(r.gap < rows[i - 1].gap) {
            violations.push(Violation { row: i, kind: ViolationKind::GapNotDecreasing });
        }
    }
    Ok(Sweep { rows, violations })
}

/// Limit estimates of `(1 − f(1−ε))/ε` and their extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorEstimate {
    #[serde(serialize_with = "ser_f64")]
    pub m: f64,
    /// `(ε, (1 − f(1−ε))/ε)` for `ε = 10⁻⁴, 10⁻⁵, 10⁻⁶`.
    pub raw: Vec<(f64, f64)>,
    #[serde(serialize_with = "ser_f64")]
    pub closed_form: f64,
}

const TAYLOR_EPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

/// `m` in `f(p1) = 1 − m(1 − p1) + O((1−p1)²)`.
pub fn taylor_coefficient() -> Result<f64> {
    Ok(taylor_estimate()?.m)
}

pub fn taylor_estimate() -> Result<TaylorEstimate> {
    let raw = TAYLOR_EPS
        .iter()
        .map(|&e| Ok((e, (1.0 - f_of(1.0 - e)?) / e)))
        .collect::<Result<Vec<_>>>()?;
    // g(ε) = m + c₁ε + c₂ε²; eliminate c₁ then c₂ (ratio 10 each time)
    let r1: Vec<f64> = raw.windows(2).map(|w| (10.0 * w[1].1 - w[0].1) / 9.0).collect();
    let m = (100.0 * r1[1] - r1[0]) / 99.0;
    // the ε = 10⁻⁶ value carries ~10⁻¹⁰ rounding; a larger spread means
    // cancellation has eaten the estimate
    if !m.is_finite() || (m - raw[2].1).abs() > 1e-4 {
        return Err(Error::NumericDomain {
            what: "Richardson extrapolation of the Taylor coefficient",
            value: m,
        });
    }
    Ok(TaylorEstimate {
        m,
        raw,
        closed_form: taylor_closed_form()?,
    })
}

/// The closed-form Taylor coefficient, with `arcosh²(x)` for `x < 1` read on
/// the principal complex branch, `arcosh(x) = i·arccos(x)`, so
/// `arcosh²(x) = −arccos²(x)`.
pub fn taylor_closed_form() -> Result<f64> {
    use std::f64::consts::PI;
    let s25 = (2.0 / 5.0_f64).sqrt().acos();
    let s23 = (2.0 / 3.0_f64).sqrt().acos();
    let t25 = (2.0 / 5.0_f64.sqrt()).acos();
    let ach2_s23 = -s23 * s23;
    let ach2_t25 = -t25 * t25;
    let pi2 = PI * PI;
    let u = s25 * s25 + ach2_s23;
    let r1 = (pi2 + 16.0 * ach2_s23) * u;
    let r2 = u * (s23 * s23 + ach2_t25);
    if r1 < 0.0 || r2 < 0.0 {
        return Err(Error::NumericDomain {
            what: "closed-form Taylor coefficient radicand",
            value: r1.min(r2),
        });
    }
    let num = pi2 * u + 8.0 * t25 * (t25 * (2.0 * s23 * s23 + r1.sqrt()) + 4.0 * s23 * r2.sqrt());
    Ok(num / (pi2 * s25 * s25))
}

/// Smallest `k` with `f^k(p1) ≤ 3/√14`.
pub fn iteration_count(p1: f64) -> Result<usize> {
    iteration_count_with(p1, 1_000_000)
}

pub fn iteration_count_with(p1: f64, budget: usize) -> Result<usize> {
    let mut p = p1;
    f_of(p)?;
    for k in 0..budget {
        if p <= strong_upper() {
            return Ok(k);
        }
        p = f_of(p)?;
    }
    if p <= strong_upper() {
        return Ok(budget);
    }
    Err(Error::IterationBudgetExceeded(budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarKind {
    ParallelDefinite,
    OrthogonalDefinite,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarVerdict {
    pub kind: StarKind,
    #[serde(serialize_with = "ser_f64")]
    pub overlap: f64,
}

/// Where `b` sits relative to the state `a`: on the ray, in the orthogonal
/// plane (both value definite), or elsewhere.
pub fn classify_observable(a: Ray, b: Ray, eps: f64) -> StarVerdict {
    let overlap = inner(a, b);
    let kind = if overlap >= 1.0 - eps {
        StarKind::ParallelDefinite
    } else if overlap <= eps {
        StarKind::OrthogonalDefinite
    } else {
        StarKind::Indefinite
    };
    StarVerdict { kind, overlap }
}

/// A uniformly distributed ray: three standard normals, normalized.
pub fn sample_ray<R: Rng + ?Sized>(rng: &mut R) -> Ray {
    loop {
        let v = Vector3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Ok(r) = Ray::normalize(v) {
            return r;
        }
    }
}

/// Fraction of `rays` classified value definite relative to `a`.
pub fn measure_fraction(a: Ray, rays: &[Ray], eps: f64) -> f64 {
    let hits = rays
        .iter()
        .filter(|&&b| classify_observable(a, b, eps).kind != StarKind::Indefinite)
        .count();
    hits as f64 / rays.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    #[serde(serialize_with = "ser_f64")]
    pub eps: f64,
    pub samples: u64,
    #[serde(serialize_with = "ser_f64")]
    pub fraction: f64,
    pub seed: u64,
}

/// Samples per independent substream.
pub const MEASURE_CHUNK: u64 = 1 << 16;

pub fn measure_demo(a: Ray, samples: u64, eps: f64, seed: u64) -> Result<MeasureReport> {
    measure_demo_with(a, samples, eps, seed, Jobs::SEQUENTIAL)
}

/// Chunk `i` of [`MEASURE_CHUNK`] samples draws from ChaCha8 seeded with
/// `seed` on stream `i`, so the result does not depend on `jobs`.
pub fn measure_demo_with(a: Ray, samples: u64, eps: f64, seed: u64, jobs: Jobs) -> Result<MeasureReport> {
    if samples == 0 || !(eps > 0.0 && eps < 0.1) {
        return Err(Error::PreconditionViolated(format!(
            "measure demo needs samples ≥ 1 and 0 < eps < 0.1, got {samples}, {eps}"
        )));
    }
    let chunks = samples.div_ceil(MEASURE_CHUNK);
    let counts = map_indices(chunks as usize, jobs, |i| {
        let i = i as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let len = MEASURE_CHUNK.min(samples - i * MEASURE_CHUNK);
        (0..len)
            .filter(|_| classify_observable(a, sample_ray(&mut rng), eps).kind != StarKind::Indefinite)
            .count() as u64
    });
    let hits: u64 = counts.iter().sum();
    Ok(MeasureReport {
        eps,
        samples,
        fraction: hits as f64 / samples as f64,
        seed,
    })
}
