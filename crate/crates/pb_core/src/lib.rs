//! Literals, normalized pseudo-Boolean constraints, objectives, assignments
//! and the cutting-planes rules shared by the solver, the proof logger and
//! the proof checker.

mod constraint;
mod lit;
mod objective;
mod propagate;
pub mod text;

pub use constraint::{normalize, Coeff, PbConstraint, PbError, PbResult, RawConstraint, Relation};
pub use lit::{Lit, Var};
pub use objective::Objective;
pub use propagate::{propagate, Assignment, Propagation, Propagator, Reason};

/// Cutting-planes addition.
pub fn cp_add(a: &PbConstraint, b: &PbConstraint) -> PbResult<PbConstraint> {
    a.add(b)
}

/// Cutting-planes multiplication by `k >= 1`.
pub fn cp_multiply(a: &PbConstraint, k: Coeff) -> PbResult<PbConstraint> {
    a.multiply(k)
}

/// Cutting-planes division by `k >= 1`, rounding up.
pub fn cp_divide(a: &PbConstraint, k: Coeff) -> PbResult<PbConstraint> {
    a.divide(k)
}

/// Cutting-planes saturation.
pub fn cp_saturate(a: &PbConstraint) -> PbConstraint {
    a.saturate()
}

/// The literal axiom `l >= 0`.
pub fn cp_literal_axiom(l: Lit) -> PbConstraint {
    PbConstraint::literal_axiom(l)
}

/// Negation of a normalized constraint.
pub fn negate_constraint(c: &PbConstraint) -> PbResult<PbConstraint> {
    c.negate()
}
