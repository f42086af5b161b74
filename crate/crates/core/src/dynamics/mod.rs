//! Algebraic analysis of homogeneous quadratic fields.

mod domination;
mod flows;
mod idempotents;
mod integrals;
mod planes;
mod witness;

pub use domination::{null_cone_domination, null_vector_with, DominationCertificate};
pub use flows::{closed_form_error, ClosedForm};
pub use idempotents::{find_idempotents, find_idempotents_with_seeds, seed_grid, Idempotent};
pub use integrals::{
    in_span, is_positive_definite, linear_first_integrals, positive_definite_in_span, positive_definite_integral,
    quadratic_first_integrals, sym_from_params,
};
pub use planes::{
    find_invariant_planes, plane_residual, restricted_coefficients, ContinuumFlag, InvariantPlane, InvariantPlanes,
};
pub use witness::{incompleteness_witness, Certificate};

use crate::error::{Error, Result};
use crate::integrator::{invariant_drift, Invariant, Trajectory};
use crate::linalg::{inverse, Mat3};
use crate::metric::QuadraticField;

/// The field in coordinates `w = L v`: `G(w) = L F(L⁻¹ w)`.
pub fn push_forward(f: &QuadraticField, l: &Mat3) -> Result<QuadraticField> {
    let linv = inverse(l).ok_or(Error::SingularMatrix)?;
    Ok(f.conjugate(l, &linv))
}

/// `(y − z) / z^λ`, conserved by the `Q8` field of `h(λ)` on `z > 0`.
pub fn q8_invariant(lambda: f64) -> Invariant {
    Invariant::PowerRatio {
        name: "(y-z)/z^lambda".into(),
        numerator: [0.0, 1.0, -1.0],
        denominator: [0.0, 0.0, 1.0],
        exponent: lambda,
    }
}

/// `ξ / η^λ` with `ξ = y + s z`, `η = z − y`, conserved by the `Q5,s` field of `h(λ)` on `η > 0`.
pub fn q5_invariant(lambda: f64, s: f64) -> Invariant {
    Invariant::PowerRatio {
        name: "xi/eta^lambda".into(),
        numerator: [0.0, 1.0, s],
        denominator: [0.0, -1.0, 1.0],
        exponent: lambda,
    }
}

/// The `(x, ξ, η)` coordinates adapted to the two invariant planes of `Q5,s`.
pub fn q5_adapted_coordinates(s: f64) -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, s], [0.0, -1.0, 1.0]]
}

/// Largest relative drift of a partially defined invariant along a trajectory.
pub fn partial_invariant_drift(kind: &Invariant, trajectory: &Trajectory) -> Result<f64> {
    Ok(invariant_drift(trajectory, std::slice::from_ref(kind))?[0].max_drift)
}
