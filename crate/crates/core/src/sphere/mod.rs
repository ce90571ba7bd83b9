//! Polynomials and functions on `S^{d-1}`: exact moments, quadrature, the `V_g`
//! action, its Lie-algebra derivative `pi(A)`, and moment-recursion checks.

pub mod action;
pub mod moments;
pub mod poly;
pub mod quadrature;

pub use action::{
    invariance_residual, lie_action, lie_derivative_error, sp_algebra_membership, sp_group_membership, vg_action,
    InvarianceResidual,
};
pub use moments::{
    gamma_half, moment_recursion_check, sphere_moment, sphere_volume, MomentFunctional, RecursionReport, RecursionRow,
};
pub use poly::{MultiIndex, SphereFunction, SpherePoly};
pub use quadrature::{quadrature_integrate, sample_directions, QuadratureEstimate, QuadratureRule};

use num_complex::Complex64;

/// Exact `int_{S^{d-1}} b` for a polynomial.
pub fn sphere_integrate(b: &SpherePoly) -> Complex64 {
    b.integrate()
}
