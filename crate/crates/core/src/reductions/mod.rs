//! Forcing constructions.
//!
//! * [`reduce_toward`]: given `a`, `b` both valued 1, force a ray `c` with a
//!   chosen overlap `⟨a|c⟩ = x`, `|x| > ⟨a|b⟩`, to take the value 1.
//! * [`iterated_step`]: three glued reductions forcing a ray `c` with
//!   *smaller* overlap `f(⟨a|b⟩) < ⟨a|b⟩`.
//! * [`iterate_reduction`]: repeat the step until `⟨a|c_k⟩ ≤ 3/√14`.
//! * [`construct_extended_witness`]: the finite observable set on which no
//!   admissible non-contextual assignment has `a = 1` and `b` definite.

mod closing;
mod gadget;
mod step;
mod witness;

pub use closing::{closing_gadget, constructed_strong_gadget, zero_crossing};
pub use gadget::{iterated_topology, realize, reduce_toward, reduction_topology, Reduction, ZBranch};
pub use step::{
    f_of, f_unchecked, iterate_reduction, iterate_reduction_with, iterated_step, iterated_step_with, ReductionTrace,
    StepConfig,
};
pub use witness::{
    construct_extended_witness, Certification, StrongGadget, WitnessBuilder, WitnessConfig, WitnessSet,
};

/// `3/√14`: upper end of the overlap window handled by the 24-observable
/// strong Kochen-Specker gadget.
pub fn strong_upper() -> f64 {
    3.0 / 14.0_f64.sqrt()
}

/// `√(5/14)`: lower end of that window.
pub fn strong_lower() -> f64 {
    (5.0 / 14.0_f64).sqrt()
}

/// Angle-scaling constants of the three glued reductions, fitted to the
/// `1/√2 → 1/√3` configuration.
pub fn alpha1() -> f64 {
    (2.0 / 3.0_f64).sqrt().acos() / std::f64::consts::FRAC_1_SQRT_2.acos()
}

pub fn alpha2() -> f64 {
    (2.0 / 5.0_f64.sqrt()).acos() / (2.0 / 3.0_f64).sqrt().acos()
}

pub fn alpha3() -> f64 {
    (2.0 / 3.0_f64).sqrt().acos() / (2.0 / 5.0_f64).sqrt().acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_constants_shrink_angles() {
        for a in [alpha1(), alpha2(), alpha3()] {
            assert!(a > 0.0 && a < 1.0, "{a}");
        }
        assert!((strong_upper() - 0.801_783_725_737_273_2).abs() < 1e-15);
        assert!((strong_lower() - 0.597_614_304_667_196_8).abs() < 1e-15);
    }
}
