//! The noncommutative torus `C(T^d_theta)` on finitely supported Fourier series.
//!
//! An element is `x = sum_n c_n u_n` with the twisted product
//! `u_n u_m = e^{(i/2)(n, theta m)} u_{n+m}`. Since `(n, theta n) = 0` for
//! antisymmetric `theta`, `u_n u_{-n} = u_0`, so `u_n^* = u_{-n}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, Point};

pub const DEFAULT_PRUNE: f64 = 1e-15;
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Real antisymmetric `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl ThetaMatrix {
    pub fn new(d: usize, entries: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("theta needs d >= 2, got {d}")));
        }
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((entries[i * d + j] + entries[j * d + i]).abs());
            }
        }
        if worst > ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric(worst));
        }
        Ok(Self { d, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::new(d, entries)
    }

    /// Builds theta from its strictly upper-triangular entries, row by row.
    pub fn from_upper(d: usize, upper: &[f64]) -> Result<Self> {
        let expected = d * d.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: upper.len() });
        }
        let mut entries = vec![0.0; d * d];
        let mut it = upper.iter();
        for i in 0..d {
            for j in i + 1..d {
                let v = *it.next().unwrap();
                entries[i * d + j] = v;
                entries[j * d + i] = -v;
            }
        }
        Self::new(d, entries)
    }

    /// `theta_12 = a` in dimension 2.
    pub fn planar(a: f64) -> Self {
        Self { d: 2, entries: vec![0.0, a, -a, 0.0] }
    }

    pub fn zero(d: usize) -> Self {
        Self { d, entries: vec![0.0; d * d] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    /// Bilinear form `(n, theta m)`.
    pub fn form(&self, n: &[i64], m: &[i64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.d {
            if n[i] == 0 {
                continue;
            }
            let row = &self.entries[i * self.d..(i + 1) * self.d];
            let inner: f64 = row.iter().zip(m).map(|(t, &mj)| t * mj as f64).sum();
            acc += n[i] as f64 * inner;
        }
        acc
    }

    /// Cocycle `e^{(i/2)(n, theta m)}`.
    pub fn phase(&self, n: &[i64], m: &[i64]) -> Complex64 {
        Complex64::from_polar(1.0, 0.5 * self.form(n, m))
    }
}

/// Finitely supported element `sum_n c_n u_n` of `C(T^d_theta)`.
#[derive(Debug, Clone)]
pub struct TorusElement {
    theta: Arc<ThetaMatrix>,
    coeffs: BTreeMap<Point, Complex64>,
    prune: f64,
}

impl PartialEq for TorusElement {
    fn eq(&self, other: &Self) -> bool {
        self.theta == other.theta && self.coeffs == other.coeffs
    }
}

impl TorusElement {
    pub fn zero(theta: Arc<ThetaMatrix>) -> Self {
        Self { theta, coeffs: BTreeMap::new(), prune: DEFAULT_PRUNE }
    }

    /// The unitary generator `u_n`.
    pub fn unitary(theta: Arc<ThetaMatrix>, n: &[i64]) -> Self {
        Self::monomial(theta, n, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(theta: Arc<ThetaMatrix>, n: &[i64], c: Complex64) -> Self {
        assert_eq!(n.len(), theta.d(), "lattice index has wrong dimension");
        let mut x = Self::zero(theta);
        x.add_term(n, c);
        x
    }

    pub fn identity(theta: Arc<ThetaMatrix>) -> Self {
        let n = vec![0; theta.d()];
        Self::unitary(theta, &n)
    }

    pub fn from_terms(theta: Arc<ThetaMatrix>, terms: impl IntoIterator<Item = (Point, Complex64)>) -> Result<Self> {
        let mut x = Self::zero(theta);
        for (n, c) in terms {
            if n.len() != x.d() {
                return Err(Error::DimensionMismatch { expected: x.d(), found: n.len() });
            }
            x.add_term(&n, c);
        }
        Ok(x)
    }

    /// `terms` random coefficients on frequencies with `|n_k| <= max_freq`, always
    /// including `u_0`.
    pub fn random<R: rand::Rng>(theta: Arc<ThetaMatrix>, max_freq: i64, terms: usize, rng: &mut R) -> Self {
        let d = theta.d();
        let mut x = Self::zero(theta);
        let coeff = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c0 = coeff(rng);
        x.add_term(&vec![0; d], c0);
        for _ in 1..terms {
            let n: Point = (0..d).map(|_| rng.gen_range(-max_freq..=max_freq)).collect();
            let c = coeff(rng);
            x.add_term(&n, c);
        }
        x
    }

    pub fn with_prune(mut self, prune: f64) -> Self {
        self.prune = prune;
        self.prune_small();
        self
    }

    pub fn d(&self) -> usize {
        self.theta.d()
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix> {
        &self.theta
    }

    pub fn coeffs(&self) -> &BTreeMap<Point, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, n: &[i64]) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest Euclidean norm of an index in the support.
    pub fn support_radius(&self) -> f64 {
        self.coeffs.keys().map(|n| (lattice::norm_sq(n) as f64).sqrt()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, n: &[i64], c: Complex64) {
        let prune = self.prune;
        let slot = self.coeffs.entry(n.to_vec()).or_default();
        *slot += c;
        if slot.norm() < prune {
            self.coeffs.remove(n);
        }
    }

    fn prune_small(&mut self) {
        let prune = self.prune;
        self.coeffs.retain(|_, c| c.norm() >= prune);
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.theta, &other.theta) || self.theta == other.theta {
            Ok(())
        } else {
            Err(Error::ThetaMismatch)
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.theta.clone());
        out.prune = self.prune;
        for (n, v) in &self.coeffs {
            out.add_term(n, v * c);
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (n, v) in &other.coeffs {
            out.add_term(n, *v);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Twisted convolution `(xy)_p = sum_{n+m=p} x_n y_m e^{(i/2)(n, theta m)}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.theta.clone());
        out.prune = self.prune.min(other.prune);
        let mut acc: BTreeMap<Point, Complex64> = BTreeMap::new();
        for (n, a) in &self.coeffs {
            for (m, b) in &other.coeffs {
                *acc.entry(lattice::add(n, m)).or_default() += a * b * self.theta.phase(n, m);
            }
        }
        for (p, v) in acc {
            if v.norm() >= out.prune {
                out.coeffs.insert(p, v);
            }
        }
        Ok(out)
    }

    /// `(x^*)_n = conj(x_{-n})`.
    pub fn adjoint(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(n, c)| (lattice::neg(n), c.conj())).collect();
        Self { theta: self.theta.clone(), coeffs, prune: self.prune }
    }

    /// Normalised trace: the `u_0` coefficient.
    pub fn trace(&self) -> Complex64 {
        self.coeff(&vec![0; self.d()])
    }

    /// Derivation `partial_j u_n = i n_j u_n`, with `j` 1-based.
    pub fn derivation(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.d() {
            return Err(Error::IndexOutOfRange { index: j, dim: self.d() });
        }
        let mut out = Self::zero(self.theta.clone());
        out.prune = self.prune;
        for (n, c) in &self.coeffs {
            out.add_term(n, c * Complex64::new(0.0, n[j - 1] as f64));
        }
        Ok(out)
    }

    /// Translation automorphism `z_t(u_n) = e^{i(n,t)} u_n`.
    pub fn translate(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), found: t.len() });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(n, c)| {
                let arg: f64 = n.iter().zip(t).map(|(&k, s)| k as f64 * s).sum();
                (n.clone(), c * Complex64::from_polar(1.0, arg))
            })
            .collect();
        Ok(Self { theta: self.theta.clone(), coeffs, prune: self.prune })
    }

    /// `int_{[-pi,pi]^d} z_t(x) dt`, evaluated exactly: every `u_n`, `n != 0`, integrates to zero.
    pub fn translate_average(&self) -> Complex64 {
        self.trace() * (2.0 * PI).powi(self.d() as i32)
    }

    /// The coefficient l2 norm, which equals `tau(x^* x)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max coefficient distance; `None` if the thetas differ.
    pub fn max_diff(&self, other: &Self) -> Option<f64> {
        self.check_same(other).ok()?;
        let mut worst = 0.0f64;
        for (n, c) in &self.coeffs {
            worst = worst.max((c - other.coeff(n)).norm());
        }
        for (n, c) in &other.coeffs {
            if !self.coeffs.contains_key(n) {
                worst = worst.max(c.norm());
            }
        }
        Some(worst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TorusElementJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: TorusElementJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// Eigenvalue of `-Delta = sum_j D_j^2` on `u_n`, i.e. `|n|^2`.
pub fn laplacian_eigenvalue(n: &[i64]) -> f64 {
    lattice::norm_sq(n) as f64
}

impl Add for &TorusElement {
    type Output = TorusElement;
    fn add(self, rhs: Self) -> TorusElement {
        self.try_add(rhs).expect("theta mismatch in addition")
    }
}

impl Sub for &TorusElement {
    type Output = TorusElement;
    fn sub(self, rhs: Self) -> TorusElement {
        self.try_sub(rhs).expect("theta mismatch in subtraction")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CoeffJson {
    n: Vec<i64>,
    re: f64,
    im: f64,
}

/// Wire form `{"d": int, "theta": [[...]], "coeffs": [{"n": [..], "re": f, "im": f}]}`.
#[derive(Debug, Serialize, Deserialize)]
struct TorusElementJson {
    d: usize,
    theta: Vec<Vec<f64>>,
    coeffs: Vec<CoeffJson>,
}

impl From<&TorusElement> for TorusElementJson {
    fn from(x: &TorusElement) -> Self {
        Self {
            d: x.d(),
            theta: x.theta.rows(),
            coeffs: x.coeffs.iter().map(|(n, c)| CoeffJson { n: n.clone(), re: c.re, im: c.im }).collect(),
        }
    }
}

impl TryFrom<TorusElementJson> for TorusElement {
    type Error = Error;
    fn try_from(raw: TorusElementJson) -> Result<Self> {
        let theta = ThetaMatrix::from_rows(&raw.theta)?;
        if theta.d() != raw.d {
            return Err(Error::DimensionMismatch { expected: raw.d, found: theta.d() });
        }
        TorusElement::from_terms(Arc::new(theta), raw.coeffs.into_iter().map(|c| (c.n, Complex64::new(c.re, c.im))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn planar(a: f64) -> Arc<ThetaMatrix> {
        Arc::new(ThetaMatrix::planar(a))
    }

    #[test]
    fn relation_formula() {
        let th = planar(0.7);
        let u10 = TorusElement::unitary(th.clone(), &[1, 0]);
        let u01 = TorusElement::unitary(th.clone(), &[0, 1]);
        let prod = u10.mul(&u01).unwrap();
        assert_eq!(prod.support_len(), 1);
        assert!((prod.coeff(&[1, 1]) - Complex64::from_polar(1.0, 0.35)).norm() < 1e-15);
    }

    #[test]
    fn commutator_at_quarter_turn() {
        let th = planar(FRAC_PI_2);
        let u10 = TorusElement::unitary(th.clone(), &[1, 0]);
        let u01 = TorusElement::unitary(th.clone(), &[0, 1]);
        let comm = &u10.mul(&u01).unwrap() - &u01.mul(&u10).unwrap();
        let expected = c(0.0, 2.0 * (std::f64::consts::FRAC_PI_4).sin());
        assert!((comm.coeff(&[1, 1]) - expected).norm() < 1e-15);
        assert_eq!(comm.support_len(), 1);
    }

    #[test]
    fn identity_is_neutral() {
        let th = planar(1.3);
        let x = TorusElement::from_terms(th.clone(), [(vec![2, -1], c(1.0, 2.0)), (vec![0, 3], c(-0.5, 0.0))]).unwrap();
        let one = TorusElement::identity(th);
        assert_eq!(one.mul(&x).unwrap(), x);
        assert_eq!(x.mul(&one).unwrap(), x);
    }

    #[test]
    fn adjoint_examples() {
        let th = planar(0.9);
        let u = TorusElement::unitary(th.clone(), &[2, -1]);
        assert_eq!(u.adjoint(), TorusElement::unitary(th.clone(), &[-2, 1]));
        let s = TorusElement::monomial(th.clone(), &[0, 0], c(1.0, 3.0));
        assert_eq!(s.adjoint().coeff(&[0, 0]), c(1.0, -3.0));
        let u10 = TorusElement::unitary(th.clone(), &[1, 0]);
        let u01 = TorusElement::unitary(th.clone(), &[0, 1]);
        let a = u10.mul(&u01).unwrap().adjoint();
        assert!((a.coeff(&[-1, -1]) - Complex64::from_polar(1.0, -0.45)).norm() < 1e-15);
    }

    #[test]
    fn trace_examples() {
        let th = planar(2.1);
        assert_eq!(TorusElement::identity(th.clone()).trace(), c(1.0, 0.0));
        assert_eq!(TorusElement::unitary(th.clone(), &[3, 1]).trace(), c(0.0, 0.0));
        let u = TorusElement::unitary(th, &[3, 1]);
        let p = u.adjoint().mul(&u).unwrap();
        assert!((p.trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivation_and_laplacian() {
        let th = planar(0.4);
        let u = TorusElement::unitary(th.clone(), &[2, 3]);
        assert_eq!(u.derivation(1).unwrap().coeff(&[2, 3]), c(0.0, 2.0));
        assert!(TorusElement::identity(th.clone()).derivation(2).unwrap().is_zero());
        assert!(matches!(u.derivation(3), Err(Error::IndexOutOfRange { index: 3, dim: 2 })));
        assert!(u.derivation(0).is_err());
        assert_eq!(laplacian_eigenvalue(&[3, 4]), 25.0);
    }

    #[test]
    fn translation_examples() {
        let th = planar(0.4);
        let one = TorusElement::identity(th.clone());
        assert_eq!(one.translate(&[0.3, -1.2]).unwrap(), one);
        let u = TorusElement::unitary(th.clone(), &[1, 0]);
        let z = u.translate(&[PI, 0.0]).unwrap();
        assert!((z.coeff(&[1, 0]) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn translate_average_examples() {
        let th = planar(0.4);
        let x = TorusElement::from_terms(th.clone(), [(vec![0, 0], c(3.0, 0.0)), (vec![2, 1], c(5.0, 0.0))]).unwrap();
        let expected = (2.0 * PI).powi(2) * 3.0;
        assert!((x.translate_average() - c(expected, 0.0)).norm() < 1e-12);
        assert_eq!(TorusElement::unitary(th.clone(), &[0, 1]).translate_average(), c(0.0, 0.0));
        let p = TorusElement::unitary(th.clone(), &[1, 0]).mul(&TorusElement::unitary(th, &[-1, 0])).unwrap();
        assert!((p.translate_average() - c((2.0 * PI).powi(2), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn theta_mismatch_is_an_error() {
        let a = TorusElement::unitary(planar(0.1), &[1, 0]);
        let b = TorusElement::unitary(planar(0.2), &[1, 0]);
        assert!(matches!(a.mul(&b), Err(Error::ThetaMismatch)));
        assert!(matches!(a.try_add(&b), Err(Error::ThetaMismatch)));
    }

    #[test]
    fn theta_validation() {
        assert!(matches!(ThetaMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]), Err(Error::NotAntisymmetric(_))));
        let t = ThetaMatrix::from_upper(3, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.get(2, 1), -3.0);
        assert!(ThetaMatrix::from_upper(3, &[1.0]).is_err());
    }

    #[test]
    fn pruning_removes_cancelled_terms() {
        let th = planar(0.0);
        let u = TorusElement::unitary(th, &[1, 1]);
        assert!((&u - &u).is_zero());
    }

    #[test]
    fn json_wire_format() {
        let th = Arc::new(ThetaMatrix::from_upper(3, &[0.5, -1.0, 0.25]).unwrap());
        let x = TorusElement::from_terms(th, [(vec![1, 0, -2], c(0.5, -1.5)), (vec![0, 0, 0], c(2.0, 0.0))]).unwrap();
        let s = x.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["d"], 3);
        assert_eq!(v["theta"][0][1], 0.5);
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 2);
        assert_eq!(TorusElement::from_json(&s).unwrap(), x);
        let bad = r#"{"d":2,"theta":[[0,1],[1,0]],"coeffs":[]}"#;
        assert!(TorusElement::from_json(bad).is_err());
    }
}
