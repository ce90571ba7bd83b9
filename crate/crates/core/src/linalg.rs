//! Small dense linear-algebra helpers shared by the matrix models.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// The standard form `[[0,1],[-1,0]]^{(+) d/2}`.
pub fn omega(d: usize) -> Result<RMat> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::InvalidArgument(format!("symplectic form needs even d, got {d}")));
    }
    let mut m = RMat::zeros(d, d);
    for k in 0..d / 2 {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(m)
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn op_norm_real(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn check_square(m: &RMat, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// Random element `Omega S` of `sp(d)`, `S` symmetric with entries of size `scale`.
pub fn random_sp_algebra<R: Rng>(d: usize, scale: f64, rng: &mut R) -> Result<RMat> {
    let om = omega(d)?;
    let mut s = RMat::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = scale * (2.0 * rng.gen::<f64>() - 1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(om * s)
}

/// Random matrix `I + scale * U[-1,1]` rejected until `|det| >= min_det`.
pub fn random_invertible<R: Rng>(d: usize, scale: f64, min_det: f64, rng: &mut R) -> RMat {
    loop {
        let g = RMat::identity(d, d) + RMat::from_fn(d, d, |_, _| scale * (2.0 * rng.gen::<f64>() - 1.0));
        if g.determinant().abs() >= min_det {
            return g;
        }
    }
}

pub fn random_antisymmetric<R: Rng>(d: usize, rng: &mut R) -> RMat {
    let mut m = RMat::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}
