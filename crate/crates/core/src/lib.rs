//! Value-indefiniteness witnesses for three-dimensional quantum observables.
//!
//! * [`vec3`]: rays, pair frames and rotations.
//! * [`diagram`]: orthogonality hypergraphs with optional realizations.
//! * [`assignments`]: admissible three-valued assignments, propagation and
//!   search, Boolean frame functions.
//! * [`reductions`]: the reduction gadget, the iterated step and the
//!   extended witness.
//! * [`analysis`]: sweeps of the overlap map, its Taylor coefficient, the
//!   star-set classifier and the Monte Carlo measure estimate.
//! * [`data`]: shipped gadget files.

pub mod analysis;
pub mod assignments;
pub mod data;
pub mod diagram;
pub mod error;
pub mod numfmt;
pub mod par;
pub mod reductions;
pub mod vec3;

pub use assignments::{Assignment, Premise, Value, Verdict};
pub use diagram::Diagram;
pub use error::{Error, Result};
pub use vec3::{Ray, Vector3};
