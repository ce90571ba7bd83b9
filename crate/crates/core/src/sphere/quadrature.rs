//! Quadrature on `S^{d-1}`.
//!
//! Product rules: `d = 2` trapezoid in the angle; `d = 3` Gauss-Legendre in `t_1`
//! times trapezoid in the azimuth; `d = 4` Gauss-Legendre in `w = t_1^2 + t_2^2`
//! times trapezoid in both Hopf angles (surface measure `dS = dw dphi_1 dphi_2 / 2`).
//! Low-discrepancy rule: shifted Halton points pushed to the sphere by a
//! measure-preserving map. Every rule reports a two-level refinement difference.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::lattice::pairwise_sum;
use crate::sphere::moments::sphere_volume;
use crate::sphere::poly::SphereFunction;

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureRule {
    /// `n_polar` Gauss nodes (unused for `d = 2`) by `n_azimuth` equispaced angles.
    Product {
        n_polar: usize,
        n_azimuth: usize,
    },
    LowDiscrepancy {
        samples: usize,
        seed: u64,
    },
}

impl QuadratureRule {
    pub fn product(n_polar: usize, n_azimuth: usize) -> Self {
        Self::Product { n_polar, n_azimuth }
    }

    /// A product rule of about `10^6` nodes for `d <= 4`.
    pub fn fine(d: usize) -> Self {
        match d {
            2 => Self::product(0, 4096),
            3 => Self::product(256, 512),
            _ => Self::product(64, 128),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: Complex64,
    /// `|I(rule) - I(half-resolution rule)|`.
    pub error: f64,
}

fn sum_complex(parts: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = parts.iter().map(|c| c.re).collect();
    let im: Vec<f64> = parts.iter().map(|c| c.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn product_sum(f: &SphereFunction, n_polar: usize, n_az: usize) -> Result<Complex64> {
    let d = f.d();
    if n_az == 0 || (d > 2 && n_polar == 0) {
        return Err(Error::InvalidArgument("product rule needs positive node counts".into()));
    }
    let h = 2.0 * PI / n_az as f64;
    let angles: Vec<(f64, f64)> = (0..n_az).map(|j| (h * j as f64).sin_cos()).collect();
    match d {
        2 => {
            let parts: Vec<Complex64> = angles.iter().map(|&(s, c)| f.eval(&[c, s])).collect();
            Ok(sum_complex(&parts) * h)
        }
        3 => {
            let gl = GaussLegendre::new(n_polar.try_into().map_err(|_| Error::InvalidArgument("n_polar".into()))?);
            let nodes: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
            let parts: Vec<Complex64> = nodes
                .par_iter()
                .map(|&(x, w)| {
                    let r = (1.0 - x * x).max(0.0).sqrt();
                    let ring: Vec<Complex64> = angles.iter().map(|&(s, c)| f.eval(&[x, r * c, r * s])).collect();
                    sum_complex(&ring) * (w * h)
                })
                .collect();
            Ok(sum_complex(&parts))
        }
        4 => {
            let gl = GaussLegendre::new(n_polar.try_into().map_err(|_| Error::InvalidArgument("n_polar".into()))?);
            let nodes: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
            let parts: Vec<Complex64> = nodes
                .par_iter()
                .map(|&(w, wt)| {
                    let (r1, r2) = (w.sqrt(), (1.0 - w).max(0.0).sqrt());
                    let mut torus = Vec::with_capacity(angles.len());
                    for &(s1, c1) in &angles {
                        let row: Vec<Complex64> =
                            angles.iter().map(|&(s2, c2)| f.eval(&[r1 * c1, r1 * s1, r2 * c2, r2 * s2])).collect();
                        torus.push(sum_complex(&row));
                    }
                    sum_complex(&torus) * (0.5 * wt * h * h)
                })
                .collect();
            Ok(sum_complex(&parts))
        }
        _ => Err(Error::UnsupportedDimension { rule: "product", d }),
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Number of uniform coordinates consumed by [`cube_to_sphere`].
fn cube_dim(d: usize) -> usize {
    if d == 3 || d % 2 == 0 {
        d - 1
    } else {
        d
    }
}

/// Measure-preserving map from `[0,1)^k` to `S^{d-1}` (uniform measure).
fn cube_to_sphere(d: usize, u: &[f64], normal: &Normal) -> Vec<f64> {
    if d == 3 {
        let z = 1.0 - 2.0 * u[0];
        let r = (1.0 - z * z).max(0.0).sqrt();
        let (s, c) = (2.0 * PI * u[1]).sin_cos();
        return vec![z, r * c, r * s];
    }
    if d % 2 == 0 {
        // squared pair radii are Dirichlet(1,...,1); angles are uniform
        let k = d / 2;
        let mut weights = Vec::with_capacity(k);
        let mut rem = 1.0;
        for j in 0..k - 1 {
            let b = 1.0 - (1.0 - u[j]).powf(1.0 / (k - 1 - j) as f64);
            weights.push(rem * b);
            rem -= rem * b;
        }
        weights.push(rem.max(0.0));
        let mut t = Vec::with_capacity(d);
        for (j, w) in weights.iter().enumerate() {
            let (s, c) = (2.0 * PI * u[k - 1 + j]).sin_cos();
            t.push(w.sqrt() * c);
            t.push(w.sqrt() * s);
        }
        return t;
    }
    let g: Vec<f64> = u.iter().map(|&x| normal.inverse_cdf(x.clamp(1e-300, 1.0 - 1e-16))).collect();
    let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.iter().map(|x| x / r).collect()
}

/// `count` deterministic, well-spread unit vectors (shifted Halton points).
pub fn sample_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let k = cube_dim(d);
    let shift = cp_shift(k, seed);
    let normal = Normal::standard();
    (0..count as u64).map(|i| cube_to_sphere(d, &halton_point(i + 1, &shift), &normal)).collect()
}

fn cp_shift(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.gen::<f64>()).collect()
}

fn halton_point(i: u64, shift: &[f64]) -> Vec<f64> {
    shift.iter().zip(PRIMES).map(|(s, p)| (radical_inverse(i, p) + s).fract()).collect()
}

fn low_discrepancy_sum(f: &SphereFunction, samples: usize, seed: u64) -> Result<Complex64> {
    let d = f.d();
    let k = cube_dim(d);
    if k > PRIMES.len() {
        return Err(Error::UnsupportedDimension { rule: "low-discrepancy", d });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let shift = cp_shift(k, seed);
    let normal = Normal::standard();
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            let vals: Vec<Complex64> =
                (lo..hi).map(|i| f.eval(&cube_to_sphere(d, &halton_point(i as u64 + 1, &shift), &normal))).collect();
            sum_complex(&vals)
        })
        .collect();
    Ok(sum_complex(&parts) * (sphere_volume(d) / samples as f64))
}

/// Integrates `f` over `S^{d-1}` with surface measure.
pub fn quadrature_integrate(f: &SphereFunction, rule: &QuadratureRule) -> Result<QuadratureEstimate> {
    if f.d() < 2 {
        return Err(Error::InvalidArgument("sphere dimension must be >= 2".into()));
    }
    match *rule {
        QuadratureRule::Product { n_polar, n_azimuth } => {
            let value = product_sum(f, n_polar, n_azimuth)?;
            let coarse = product_sum(f, (n_polar / 2).max(1), (n_azimuth / 2).max(1))?;
            Ok(QuadratureEstimate { value, error: (value - coarse).norm() })
        }
        QuadratureRule::LowDiscrepancy { samples, seed } => {
            let value = low_discrepancy_sum(f, samples, seed)?;
            let coarse = low_discrepancy_sum(f, (samples / 2).max(1), seed)?;
            Ok(QuadratureEstimate { value, error: (value - coarse).norm() })
        }
    }
}
