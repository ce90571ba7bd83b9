//! Moyal-side checks: the translation unitaries `U(t)` on a zero-padded grid, the
//! pointwise identity behind the Fourier-side symplectic action, and decay of the
//! difference functions `h` and `h_k`.
//!
//! Grid convention: `(U(t) xi)(u) = e^{(i/2)(t, theta u)} xi(u - t)`, so that
//! `U(t) U(s) = e^{(i/2)(t, theta s)} U(t + s)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::for_each_in_ball;
use crate::linalg::{check_square, RMat};
use crate::sphere::{sample_directions, vg_action, SpherePoly};

const ALIGN_TOL: f64 = 1e-9;

/// Uniform grid `{h k : k in [-K, K]^d}` carrying `U(t)` for grid-aligned `t`.
#[derive(Debug, Clone)]
pub struct GridUnitary {
    pub d: usize,
    pub half_width: usize,
    pub spacing: f64,
    pub theta: RMat,
}

impl GridUnitary {
    pub fn new(theta: RMat, half_width: usize, spacing: f64) -> Result<Self> {
        let d = theta.nrows();
        check_square(&theta, d)?;
        if spacing <= 0.0 {
            return Err(Error::InvalidArgument("grid spacing must be positive".into()));
        }
        Ok(Self { d, half_width, spacing, theta })
    }

    fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index_to_k(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut k = vec![0i64; self.d];
        for slot in k.iter_mut().rev() {
            *slot = (idx % side) as i64 - self.half_width as i64;
            idx /= side;
        }
        k
    }

    fn k_to_index(&self, k: &[i64]) -> Option<usize> {
        let w = self.half_width as i64;
        let side = self.side() as i64;
        let mut idx = 0i64;
        for &c in k {
            if c.abs() > w {
                return None;
            }
            idx = idx * side + c + w;
        }
        Some(idx as usize)
    }

    /// Integer grid offset of a shift.
    pub fn align(&self, t: &[f64]) -> Result<Vec<i64>> {
        if t.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: t.len() });
        }
        t.iter()
            .map(|&x| {
                let q = x / self.spacing;
                if (q - q.round()).abs() > ALIGN_TOL {
                    Err(Error::UnalignedShift)
                } else {
                    Ok(q.round() as i64)
                }
            })
            .collect()
    }

    fn form(&self, a: &[f64], b: &[f64]) -> f64 {
        let bv = DVector::from_column_slice(b);
        DVector::from_column_slice(a).dot(&(&self.theta * bv))
    }

    /// `U(t) xi` with zero padding outside the grid.
    pub fn apply(&self, t: &[f64], xi: &[Complex64]) -> Result<Vec<Complex64>> {
        let shift = self.align(t)?;
        if xi.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: xi.len() });
        }
        Ok((0..self.len())
            .into_par_iter()
            .map(|idx| {
                let k = self.index_to_k(idx);
                let src: Vec<i64> = k.iter().zip(&shift).map(|(a, b)| a - b).collect();
                match self.k_to_index(&src) {
                    Some(j) => {
                        let u: Vec<f64> = k.iter().map(|&c| c as f64 * self.spacing).collect();
                        xi[j] * Complex64::from_polar(1.0, 0.5 * self.form(t, &u))
                    }
                    None => Complex64::default(),
                }
            })
            .collect())
    }

    /// Grid points whose coordinates stay `margin` steps away from the boundary.
    fn interior(&self, margin: i64) -> Vec<usize> {
        let w = self.half_width as i64 - margin;
        (0..self.len()).filter(|&idx| self.index_to_k(idx).iter().all(|c| c.abs() <= w)).collect()
    }
}

/// `max |(U(t)U(s) xi)(u) - e^{(i/2)(t,theta s)} (U(t+s) xi)(u)|` over interior grid
/// points and a fixed family of test vectors.
pub fn ccr_phase_residual(t: &[f64], s: &[f64], grid: &GridUnitary) -> Result<f64> {
    let (kt, ks) = (grid.align(t)?, grid.align(s)?);
    let ts: Vec<f64> = t.iter().zip(s).map(|(a, b)| a + b).collect();
    let margin = kt.iter().zip(&ks).map(|(a, b)| a.abs() + b.abs()).max().unwrap_or(0);
    let interior = grid.interior(margin);
    if interior.is_empty() {
        return Err(Error::InvalidArgument("shifts leave no interior grid points".into()));
    }
    let phase = Complex64::from_polar(1.0, 0.5 * grid.form(t, s));
    let mut rng = ChaCha8Rng::seed_from_u64(0xcc7);
    let mut vectors = vec![vec![Complex64::new(1.0, 0.0); grid.len()]];
    for _ in 0..3 {
        vectors.push((0..grid.len()).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect());
    }
    let mut worst = 0.0f64;
    for xi in &vectors {
        let lhs = grid.apply(t, &grid.apply(s, xi)?)?;
        let rhs = grid.apply(&ts, xi)?;
        for &i in &interior {
            worst = worst.max((lhs[i] - phase * rhs[i]).norm());
        }
    }
    Ok(worst)
}

/// `e^{(i/2)(t, theta s)}`.
pub fn ccr_phase(t: &[f64], s: &[f64], theta: &RMat) -> Complex64 {
    let sv = DVector::from_column_slice(s);
    Complex64::from_polar(1.0, 0.5 * DVector::from_column_slice(t).dot(&(theta * sv)))
}

fn random_points(d: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_directions(d, samples, seed)
        .into_iter()
        .map(|dir| {
            let r = 10f64.powf(rng.gen_range(-1.0..2.0));
            dir.into_iter().map(|x| x * r).collect()
        })
        .collect()
}

/// `max_t |b(gt/|gt|) w(gt) - (V_g b)(t/|t|) (|gt|^d / |t|^d) w(gt)|` with
/// `w(v) = (1+|v|^2)^{-d/2}`, over sampled `t` with `|t|` in `[0.1, 100]`.
pub fn multiplier_identity_residual(g: &RMat, b: &SpherePoly, samples: usize, seed: u64) -> Result<f64> {
    let d = b.d();
    let vb = vg_action(g, &b.to_function())?;
    let worst = random_points(d, samples, seed)
        .par_iter()
        .map(|t| {
            let tv = DVector::from_column_slice(t);
            let gt = g * &tv;
            let (rt, rg) = (tv.norm(), gt.norm());
            let weight = (1.0 + rg * rg).powf(-(d as f64) / 2.0);
            let dir_g: Vec<f64> = gt.iter().map(|x| x / rg).collect();
            let dir_t: Vec<f64> = t.iter().map(|x| x / rt).collect();
            let lhs = b.eval(&dir_g) * weight;
            let rhs = vb.eval(&dir_t) * (rg / rt).powi(d as i32) * weight;
            (lhs - rhs).norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `h(t) = (|gt|^d/|t|^d)(1+|gt|^2)^{-d/2} - (1+|t|^2)^{-d/2}`, evaluated without
/// cancellation as `(1+|t|^2)^{-d/2} ((1+x)^{d/2} - 1)` with
/// `x = (a-b)/(b(1+a))`, `a = |gt|^2`, `b = |t|^2`.
pub fn h_value(g: &RMat, t: &[f64]) -> f64 {
    let d = t.len();
    let b: f64 = t.iter().map(|x| x * x).sum();
    let a: f64 = (0..d)
        .map(|i| {
            let row: f64 = t.iter().enumerate().map(|(j, x)| g[(i, j)] * x).sum();
            row * row
        })
        .sum();
    let x = (a - b) / (b * (1.0 + a));
    let base = 1.0 + b;
    if d % 2 == 0 {
        // binomial expansion of (1+x)^{d/2} - 1
        let half = (d / 2) as i32;
        let (mut term, mut acc) = (1.0, 0.0);
        for j in 1..=half {
            term *= x * (half - j + 1) as f64 / j as f64;
            acc += term;
        }
        acc * base.powi(-half)
    } else {
        base.powf(-(d as f64) / 2.0) * ((d as f64 / 2.0) * x.ln_1p()).exp_m1()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellValue {
    #[serde(rename = "R")]
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HDecayReport {
    /// `sup_{R <= |t| <= 2R} |h(t)| |t|^{d+2}` per shell.
    pub profile: Vec<ShellValue>,
    /// Sum over unit cells centred in the ball of radius `R` of the per-cell sup of `|h|`.
    pub cell_sums: Vec<ShellValue>,
}

fn shell_points(d: usize, radius: f64, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = sample_directions(d, samples, seed);
    for k in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[k] = s;
            dirs.push(e);
        }
    }
    let radial = 16;
    let mut pts = Vec::with_capacity(dirs.len() * radial);
    for j in 0..radial {
        let r = radius * 2f64.powf(j as f64 / (radial - 1) as f64);
        pts.extend(dirs.iter().map(|u| u.iter().map(|x| x * r).collect::<Vec<_>>()));
    }
    pts
}

fn cell_sup(g: &RMat, centre: &[i64]) -> f64 {
    let d = centre.len();
    let mut best = 0.0f64;
    let mut p = [0.0f64; 16];
    let p = &mut p[..d];
    for mask in 0..=(1u32 << d) {
        for (k, slot) in p.iter_mut().enumerate() {
            let offset = if mask == 1 << d {
                0.0
            } else if mask & (1 << k) != 0 {
                0.5
            } else {
                -0.5
            };
            *slot = centre[k] as f64 + offset;
        }
        if p.iter().any(|x| *x != 0.0) {
            best = best.max(h_value(g, p).abs());
        }
    }
    best
}

/// Shell profile of `|h| |t|^{d+2}` and cell sums of `|h|` (`cell_radii` may be empty).
pub fn h_decay_profile(g: &RMat, shell_radii: &[f64], cell_radii: &[u64], samples: usize) -> Result<HDecayReport> {
    let d = g.nrows();
    check_square(g, d)?;
    if d > 16 {
        return Err(Error::UnsupportedDimension { rule: "cell sums", d });
    }
    if g.determinant().abs() <= 1e-12 {
        return Err(Error::Singular(g.determinant().abs()));
    }
    let profile = shell_radii
        .iter()
        .map(|&r| {
            let value = shell_points(d, r, samples, 41)
                .par_iter()
                .map(|t| h_value(g, t).abs() * (t.iter().map(|x| x * x).sum::<f64>()).powf((d as f64 + 2.0) / 2.0))
                .reduce(|| 0.0, f64::max);
            ShellValue { radius: r, value }
        })
        .collect();
    let cell_sums = cell_radii
        .iter()
        .map(|&r| {
            let sums = crate::lattice::par_slices(d, r * r, || 0.0f64, |acc, k| *acc += cell_sup(g, k));
            ShellValue { radius: r as f64, value: crate::lattice::pairwise_sum(&sums) }
        })
        .collect();
    Ok(HDecayReport { profile, cell_sums })
}

/// `h_k(t) = t_k/|t| - t_k/(1+|t|^2)^{1/2}`, evaluated as `t_k / (|t| s (s + |t|))`
/// with `s = (1+|t|^2)^{1/2}`.
pub fn riesz_difference(k: usize, t: &[f64]) -> f64 {
    let r = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        return 0.0;
    }
    let s = (1.0 + r * r).sqrt();
    t[k - 1] / (r * s * (s + r))
}

/// `sup_{R <= |t| <= 2R} |h_k(t)| |t|^2` per shell; tends to `1/2`.
pub fn riesz_difference_decay(k: usize, d: usize, radii: &[f64], samples: usize) -> Result<Vec<ShellValue>> {
    if k == 0 || k > d {
        return Err(Error::IndexOutOfRange { index: k, dim: d });
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let value = shell_points(d, r, samples, 43)
                .par_iter()
                .map(|t| riesz_difference(k, t).abs() * t.iter().map(|x| x * x).sum::<f64>())
                .reduce(|| 0.0, f64::max);
            ShellValue { radius: r, value }
        })
        .collect())
}

/// Sanity helper: every cell centre of the ball visited once.
pub fn cell_count(d: usize, r: u64) -> usize {
    let mut n = 0;
    for_each_in_ball(d, r * r, |_| n += 1);
    n
}
