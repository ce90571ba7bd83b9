//! The weighted pullback `V_g` and its infinitesimal form `pi(A)` on sphere polynomials.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_square, op_norm_real, RMat};
use crate::sphere::poly::{MultiIndex, SphereFunction, SpherePoly};
use crate::sphere::quadrature::{quadrature_integrate, QuadratureRule};

pub const SINGULAR_TOL: f64 = 1e-12;
pub const MEMBERSHIP_TOL: f64 = 1e-10;

fn check_invertible(g: &RMat) -> Result<f64> {
    let det = g.determinant();
    if det.abs() <= SINGULAR_TOL {
        return Err(Error::Singular(det.abs()));
    }
    Ok(det)
}

/// `(V_g b)(t) = |gt|^{-d} b(gt/|gt|)`. Composition: `V_g V_h = V_{hg}`.
pub fn vg_action(g: &RMat, b: &SphereFunction) -> Result<SphereFunction> {
    let d = b.d();
    check_square(g, d)?;
    check_invertible(g)?;
    let g = g.clone();
    let inner = b.clone();
    Ok(SphereFunction::new(d, move |t| {
        let gt = &g * DVector::from_column_slice(t);
        let r = gt.norm();
        let dir: Vec<f64> = gt.iter().map(|x| x / r).collect();
        inner.eval(&dir) * r.powi(-(d as i32))
    }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvarianceResidual {
    pub measured: Complex64,
    pub reference: Complex64,
    pub residual: f64,
    pub quadrature_error: f64,
}

/// `|m(V_g b) - |det g|^{-1} m(b)|` with `m(V_g b)` by quadrature and `m(b)` exact.
pub fn invariance_residual(g: &RMat, b: &SpherePoly, rule: &QuadratureRule) -> Result<InvarianceResidual> {
    let det = check_invertible(g)?;
    let vb = vg_action(g, &b.to_function())?;
    let est = quadrature_integrate(&vb, rule)?;
    let reference = b.integrate() / det.abs();
    Ok(InvarianceResidual {
        measured: est.value,
        reference,
        residual: (est.value - reference).norm(),
        quadrature_error: est.error,
    })
}

/// `(pi(A)b)(t) = <grad_S b(t), At> - d <At,t> b(t)`, kept as a raw polynomial of
/// degree `deg b + 2` (no reduction modulo `|t|^2 = 1`).
///
/// With `grad_S b = grad b - <grad b, t> t` and Euler's identity `<grad b_n, t> = |n| b_n`,
/// each monomial contributes `<grad b_n, At> - (|n| + d) <At,t> b_n`.
pub fn lie_action(a: &RMat, b: &SpherePoly) -> Result<SpherePoly> {
    let d = b.d();
    check_square(a, d)?;
    let mut out = SpherePoly::zero(d);
    for (n, c) in b.coeffs() {
        // <grad b_n, At> = sum_{k,j} n_k A_kj t_j t^{n - e_k}
        for k in 0..d {
            if n.0[k] == 0 {
                continue;
            }
            let nk = n.0[k] as f64;
            let mut base = n.0.clone();
            base[k] -= 1;
            for j in 0..d {
                let akj = a[(k, j)];
                if akj != 0.0 {
                    let mut m = base.clone();
                    m[j] += 1;
                    out.add_term(MultiIndex(m), c * (nk * akj));
                }
            }
        }
        // <At,t> b_n = sum_{i,j} A_ij t_i t_j t^n
        let weight = (n.degree() as usize + d) as f64;
        for i in 0..d {
            for j in 0..d {
                let aij = a[(i, j)];
                if aij != 0.0 {
                    out.add_term(n.bump(i + 1, 1).bump(j + 1, 1), c * (-weight * aij));
                }
            }
        }
    }
    Ok(out)
}

/// `sup_t |(V_{e^{sA}} b - b)(t)/s - (pi(A) b)(t)|` over the given points.
pub fn lie_derivative_error(a: &RMat, b: &SpherePoly, s: f64, points: &[Vec<f64>]) -> Result<f64> {
    let g = (a * s).exp();
    let vb = vg_action(&g, &b.to_function())?;
    let pb = lie_action(a, b)?;
    Ok(points.iter().map(|t| ((vb.eval(t) - b.eval(t)) / s - pb.eval(t)).norm()).fold(0.0, f64::max))
}

/// `Omega A + A^T Omega = 0` to `1e-10` (relative to `|A|` when `|A| > 1`).
pub fn sp_algebra_membership(a: &RMat, omega: &RMat) -> Result<bool> {
    check_square(a, omega.nrows())?;
    check_square(omega, a.nrows())?;
    let res = op_norm_real(&(omega * a + a.transpose() * omega));
    Ok(res <= MEMBERSHIP_TOL * op_norm_real(a).max(1.0))
}

/// `g^T F g = F` for the antisymmetric form `F` (either `Omega` or `theta`).
pub fn sp_group_membership(g: &RMat, form: &RMat) -> Result<bool> {
    check_square(g, form.nrows())?;
    check_square(form, g.nrows())?;
    let res = op_norm_real(&(g.transpose() * form * g - form));
    let scale = (op_norm_real(g).powi(2) * op_norm_real(form)).max(1.0);
    Ok(res <= MEMBERSHIP_TOL * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{omega, random_sp_algebra};
    use crate::sphere::quadrature::sample_directions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn identity_and_scaling() {
        let b = SpherePoly::coordinate(2, 1).add(&SpherePoly::coordinate(2, 2).pow(3));
        let f = b.to_function();
        let id = vg_action(&RMat::identity(2, 2), &f).unwrap();
        let one = vg_action(&(RMat::identity(2, 2) * 2.0), &SpherePoly::one(2).to_function()).unwrap();
        for t in sample_directions(2, 20, 3) {
            assert!((id.eval(&t) - f.eval(&t)).norm() < 1e-15);
            assert!((one.eval(&t).re - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let g = RMat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(vg_action(&g, &SpherePoly::one(2).to_function()), Err(Error::Singular(_))));
    }

    #[test]
    fn composition_is_opposite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = crate::linalg::random_invertible(3, 0.4, 0.2, &mut rng);
        let h = crate::linalg::random_invertible(3, 0.4, 0.2, &mut rng);
        let b = SpherePoly::from_terms(3, [(vec![1, 2, 0], 1.0), (vec![0, 0, 3], -0.5)]).unwrap().to_function();
        let lhs = vg_action(&g, &vg_action(&h, &b).unwrap()).unwrap();
        let rhs = vg_action(&(&h * &g), &b).unwrap();
        for t in sample_directions(3, 100, 9) {
            assert!((lhs.eval(&t) - rhs.eval(&t)).norm() < 1e-12);
        }
    }

    #[test]
    fn invariance_examples() {
        let rule = QuadratureRule::product(0, 256);
        let g = RMat::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let r = invariance_residual(&g, &SpherePoly::one(2), &rule).unwrap();
        assert!((r.measured.re - PI).abs() < 1e-10);
        assert!(r.residual < 1e-10);
        let rot = RMat::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let r = invariance_residual(&rot, &SpherePoly::coordinate(2, 1).pow(2), &rule).unwrap();
        assert!(r.residual < 1e-12);
        let g3 = RMat::identity(3, 3) * 3.0;
        let r =
            invariance_residual(&g3, &SpherePoly::coordinate(3, 1).pow(2), &QuadratureRule::product(32, 64)).unwrap();
        assert!((r.reference.re - 4.0 * PI / 81.0).abs() < 1e-14);
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn lie_action_examples() {
        let om = omega(2).unwrap();
        let t1 = SpherePoly::coordinate(2, 1);
        let out = lie_action(&om, &t1).unwrap();
        assert!(out.semantic_distance(&SpherePoly::coordinate(2, 2), 256) < 1e-13);
        // b = 1: only the multiplier term survives
        let a = RMat::from_row_slice(2, 2, &[1.0, 2.0, 0.5, -1.0]);
        let p = lie_action(&a, &SpherePoly::one(2)).unwrap();
        for t in sample_directions(2, 30, 4) {
            let at_t = a[(0, 0)] * t[0] * t[0] + (a[(0, 1)] + a[(1, 0)]) * t[0] * t[1] + a[(1, 1)] * t[1] * t[1];
            assert!((p.eval(&t).re + 2.0 * at_t).abs() < 1e-14);
        }
        assert!(lie_action(&a, &SpherePoly::coordinate(3, 1)).is_err());
    }

    #[test]
    fn finite_difference_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_sp_algebra(2, 1.0, &mut rng).unwrap();
        let b = SpherePoly::monomial(MultiIndex(vec![2, 1]));
        let pts = sample_directions(2, 200, 1);
        let e3 = lie_derivative_error(&a, &b, 1e-3, &pts).unwrap();
        let e4 = lie_derivative_error(&a, &b, 1e-4, &pts).unwrap();
        let ratio = e3 / e4;
        assert!((5.0..=15.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn membership_examples() {
        let om = omega(2).unwrap();
        assert!(sp_algebra_membership(&om, &om).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_sp_algebra(4, 1.0, &mut rng).unwrap();
        let om4 = omega(4).unwrap();
        assert!(sp_algebra_membership(&a, &om4).unwrap());
        assert!(sp_group_membership(&(&a * 0.7).exp(), &om4).unwrap());
        let g = RMat::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert!(!sp_group_membership(&g, &om).unwrap());
        assert!(sp_group_membership(&om, &RMat::identity(3, 3)).is_err());
    }
}
