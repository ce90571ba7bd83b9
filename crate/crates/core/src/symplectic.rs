//! Symplectic linear algebra: the normal form `beta^T theta beta = Omega`, transport of
//! `Sp(Omega)` to `Sp(theta)`, and invariance of the sphere measure under `Sp(theta)`.

use std::io::{BufRead, Write};

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_square, omega, op_norm_real, random_sp_algebra, RMat};
use crate::sphere::{invariance_residual, sp_group_membership, MultiIndex, QuadratureRule, SpherePoly};

const ANTISYMMETRY_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-12;

/// `Omega = [[0,1],[-1,0]]^{(+) d/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub d: usize,
    pub omega: RMat,
}

impl SymplecticForm {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self { d, omega: omega(d)? })
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    pub beta: RMat,
    /// `||beta^T theta beta - Omega||`.
    pub residual: f64,
    /// `lambda_j` for each `2x2` block, in block order.
    pub lambdas: Vec<f64>,
    /// `beta beta^T`, reported for inspection only.
    pub beta_beta_t: RMat,
    pub condition_number: f64,
}

fn check_antisymmetric(theta: &RMat) -> Result<()> {
    check_square(theta, theta.nrows())?;
    let asym = (theta + theta.transpose()).amax();
    if asym > ANTISYMMETRY_TOL * theta.amax().max(1.0) {
        return Err(Error::NotAntisymmetric(asym));
    }
    Ok(())
}

/// Real invertible `beta` with `beta^T theta beta = Omega`.
///
/// Eigenvectors of `-theta^2 = theta^T theta` come in pairs `(v, -theta v / lambda)`
/// spanning `theta`-invariant planes; the orthogonal matrix `Q` of these pairs brings
/// `theta` to `blockdiag(lambda_j [[0,1],[-1,0]])` and `beta = Q diag(lambda_j^{-1/2})`,
/// followed by up to three Newton refinement steps.
pub fn antisymmetric_normal_form(theta: &RMat) -> Result<NormalForm> {
    check_antisymmetric(theta)?;
    let d = theta.nrows();
    let om = omega(d)?;
    let det = theta.determinant();
    if det.abs() <= SINGULAR_TOL {
        return Err(Error::Singular(det.abs()));
    }
    let sym = theta.transpose() * theta;
    let mut q = RMat::zeros(d, d);
    let mut lambdas = Vec::with_capacity(d / 2);
    for pair in 0..d / 2 {
        let filled = 2 * pair;
        let basis = q.columns(0, filled).into_owned();
        let complement = RMat::identity(d, d) - &basis * basis.transpose();
        let eig = SymmetricEigen::new(&complement * &sym * &complement);
        let top = eig.eigenvalues.max();
        let mut proj = RMat::zeros(d, d);
        for (i, &mu) in eig.eigenvalues.iter().enumerate() {
            if (mu - top).abs() <= 1e-8 * top {
                let u = eig.eigenvectors.column(i);
                proj += u * u.transpose();
            }
        }
        // the standard basis vector with the largest component in the top eigenspace
        let mut v = proj.column(0).into_owned();
        for i in 1..d {
            if proj[(i, i)] > v.norm_squared() + 1e-12 {
                v = proj.column(i).into_owned();
            }
        }
        v /= v.norm();
        let lambda = (theta * &v).norm();
        let mut w = -(theta * &v) / lambda;
        w = &complement * w;
        w -= &v * v.dot(&w);
        w /= w.norm();
        q.set_column(filled, &v);
        q.set_column(filled + 1, &w);
        lambdas.push(lambda);
    }
    let scale = RMat::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        lambdas.iter().flat_map(|l| [l.powf(-0.5), l.powf(-0.5)]),
    ));
    let mut beta = q * scale;
    // E = beta^T theta beta - Omega; beta (I + Omega E / 2) cancels E to first order
    let mut residual = (beta.transpose() * theta * &beta - &om).norm();
    for _ in 0..3 {
        if residual == 0.0 {
            break;
        }
        let e = beta.transpose() * theta * &beta - &om;
        let next = &beta * (RMat::identity(d, d) + &om * e * 0.5);
        let r = (next.transpose() * theta * &next - &om).norm();
        if r >= residual {
            break;
        }
        beta = next;
        residual = r;
    }
    let sv = beta.clone().singular_values();
    let condition_number = sv.max() / sv.min();
    let beta_beta_t = &beta * beta.transpose();
    Ok(NormalForm { beta, residual, lambdas, beta_beta_t, condition_number })
}

/// `beta g beta^{-1}`, which lies in `Sp(theta)` when `g` lies in `Sp(Omega)`.
pub fn sp_theta_conjugate(g: &RMat, beta: &RMat, theta: &RMat) -> Result<RMat> {
    let d = g.nrows();
    check_square(beta, d)?;
    let om = omega(d)?;
    if !sp_group_membership(g, &om)? {
        return Err(Error::NotInGroup("Sp(Omega)"));
    }
    let inv = beta.clone().try_inverse().ok_or(Error::Singular(beta.determinant().abs()))?;
    let h = beta * g * inv;
    if !sp_group_membership(&h, theta)? {
        return Err(Error::NotInGroup("Sp(theta)"));
    }
    Ok(h)
}

/// `exp(A)` for a random `A` in `sp(Omega)` with entries of size `scale`.
pub fn random_symplectic<R: rand::Rng>(d: usize, scale: f64, rng: &mut R) -> Result<RMat> {
    Ok(random_sp_algebra(d, scale, rng)?.exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceRow {
    pub group_element: usize,
    pub n: Vec<u32>,
    pub residual: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub d: usize,
    pub max_residual: f64,
    pub max_quadrature_error: f64,
    pub rows: Vec<InvarianceRow>,
}

/// `|m(V_g b) - m(b)|` for each `g` and each monomial `b` of degree `<= degree`.
pub fn sp_invariance_residuals(gs: &[RMat], degree: u32, rule: &QuadratureRule) -> Result<InvarianceReport> {
    let d = gs.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidArgument("no group elements".into()))?;
    let mut rows = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        for n in MultiIndex::up_to_degree(d, degree) {
            let r = invariance_residual(g, &SpherePoly::monomial(n.clone()), rule)?;
            rows.push(InvarianceRow {
                group_element: i,
                n: n.0,
                residual: r.residual,
                quadrature_error: r.quadrature_error,
            });
        }
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let max_quadrature_error = rows.iter().map(|r| r.quadrature_error).fold(0.0, f64::max);
    Ok(InvarianceReport { d, max_residual, max_quadrature_error, rows })
}

/// Invariance of the sphere measure under `count` random elements of `Sp(theta)`,
/// built as `beta exp(A) beta^{-1}` with `A` in `sp(Omega)`.
pub fn sp_invariant_functional_check(
    theta: &RMat,
    degree: u32,
    rule: &QuadratureRule,
    count: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let nf = antisymmetric_normal_form(theta)?;
    let d = theta.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs = (0..count)
        .map(|_| sp_theta_conjugate(&random_symplectic(d, 0.3, &mut rng)?, &nf.beta, theta))
        .collect::<Result<Vec<_>>>()?;
    sp_invariance_residuals(&gs, degree, rule)
}

/// Row-major CSV, one matrix row per line.
pub fn write_matrix_csv<W: Write>(m: &RMat, mut w: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<RMat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad matrix entry '{x}'"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), found: row.len() });
            }
        }
        rows.push(row);
    }
    let (n, m) = (rows.len(), rows.first().map_or(0, Vec::len));
    Ok(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

/// `||beta^T theta beta - Omega||` relative check used by reports.
pub fn normal_form_residual(theta: &RMat, beta: &RMat) -> Result<f64> {
    let om = omega(theta.nrows())?;
    Ok(op_norm_real(&(beta.transpose() * theta * beta - om)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_antisymmetric;
    use rand::Rng;

    #[test]
    fn omega_invariants() {
        let f = SymplecticForm::new(6).unwrap();
        assert_eq!(&f.omega * &f.omega, -RMat::identity(6, 6));
        assert_eq!(f.omega.transpose(), -&f.omega);
        assert!(SymplecticForm::new(3).is_err());
    }

    #[test]
    fn scalar_multiple_of_omega() {
        let a = 2.5;
        let theta = omega(2).unwrap() * a;
        let nf = antisymmetric_normal_form(&theta).unwrap();
        assert!((&nf.beta - RMat::identity(2, 2) * a.powf(-0.5)).norm() < 1e-14);
        assert!(nf.residual < 1e-14);
        let g = random_symplectic(2, 0.5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let h = sp_theta_conjugate(&g, &nf.beta, &theta).unwrap();
        assert!((h - g).norm() < 1e-13);
    }

    #[test]
    fn random_normal_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 4, 6] {
            for _ in 0..30 {
                let theta = random_antisymmetric(d, &mut rng);
                if theta.determinant().abs() < 1e-6 {
                    continue;
                }
                let nf = antisymmetric_normal_form(&theta).unwrap();
                assert!(nf.residual < 1e-10, "d={d} residual {}", nf.residual);
                assert!(nf.condition_number.is_finite());
            }
        }
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        let theta = omega(4).unwrap() * 0.7;
        let nf = antisymmetric_normal_form(&theta).unwrap();
        assert!(nf.residual < 1e-13);
        let mut rot = RMat::identity(4, 4);
        let (s, c) = 0.4f64.sin_cos();
        rot[(0, 0)] = c;
        rot[(0, 2)] = -s;
        rot[(2, 0)] = s;
        rot[(2, 2)] = c;
        let theta = &rot * omega(4).unwrap() * rot.transpose() * 1.3;
        assert!(antisymmetric_normal_form(&theta).unwrap().residual < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(antisymmetric_normal_form(&RMat::zeros(2, 2)), Err(Error::Singular(_))));
        let mut bad = omega(2).unwrap();
        bad[(0, 1)] = 2.0;
        assert!(matches!(antisymmetric_normal_form(&bad), Err(Error::NotAntisymmetric(_))));
        let theta = omega(2).unwrap();
        let nf = antisymmetric_normal_form(&theta).unwrap();
        let not_sp = RMat::from_diagonal_element(2, 2, 2.0);
        assert!(matches!(sp_theta_conjugate(&not_sp, &nf.beta, &theta), Err(Error::NotInGroup(_))));
    }

    #[test]
    fn conjugation_lands_in_sp_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta = random_antisymmetric(4, &mut rng) + omega(4).unwrap();
        let nf = antisymmetric_normal_form(&theta).unwrap();
        let id = sp_theta_conjugate(&RMat::identity(4, 4), &nf.beta, &theta).unwrap();
        assert!((id - RMat::identity(4, 4)).norm() < 1e-12);
        for _ in 0..10 {
            let s = rng.gen_range(-2.0..2.0);
            let g = (random_sp_algebra(4, 0.5, &mut rng).unwrap() * s).exp();
            let h = sp_theta_conjugate(&g, &nf.beta, &theta).unwrap();
            assert!((h.transpose() * &theta * &h - &theta).norm() < 1e-9);
        }
    }

    #[test]
    fn invariance_of_the_sphere_measure() {
        let theta = omega(2).unwrap();
        let rot = (omega(2).unwrap() * 0.7).exp();
        let rep = sp_invariance_residuals(&[RMat::identity(2, 2), rot], 6, &QuadratureRule::product(0, 256)).unwrap();
        assert!(rep.max_residual < 1e-9);
        let rep = sp_invariant_functional_check(&theta, 4, &QuadratureRule::product(0, 1024), 5, 3).unwrap();
        assert!(rep.max_residual < 1e-9);
    }

    #[test]
    fn matrix_csv_roundtrip() {
        let m = RMat::from_row_slice(2, 3, &[1.0, -2.5, 3e-7, 0.0, 4.0, -1.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice()).unwrap(), m);
        assert!(read_matrix_csv("1,2\n3\n".as_bytes()).is_err());
    }
}
