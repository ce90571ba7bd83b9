use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::moments::sphere_moment;
use crate::sphere::quadrature::sample_directions;

/// Exponent vector `n = (n_1, ..., n_d)` of the monomial `b_n(t) = prod t_k^{n_k}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    /// The unit index `e_k`, 1-based.
    pub fn unit(d: usize, k: usize) -> Self {
        let mut n = vec![0; d];
        n[k - 1] = 1;
        Self(n)
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn has_odd(&self) -> bool {
        self.0.iter().any(|k| k % 2 == 1)
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `n + c e_k`, 1-based `k`.
    pub fn bump(&self, k: usize, c: u32) -> Self {
        let mut n = self.0.clone();
        n[k - 1] += c;
        Self(n)
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        self.0.iter().zip(t).map(|(&k, x)| x.powi(k as i32)).product()
    }

    /// All indices in dimension `d` with total degree `<= max_degree`, graded then lexicographic.
    pub fn up_to_degree(d: usize, max_degree: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut cur = vec![0u32; d];
            compositions(d, deg, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(d: usize, left: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos == d - 1 {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        compositions(d, left - k, pos + 1, cur, out);
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Polynomial `sum_n c_n b_n` restricted to the unit sphere `S^{d-1}`.
///
/// The coefficient map is not canonical (`|t|^2 = 1` identifies distinct maps), so
/// equality is checked semantically with [`SpherePoly::semantic_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoly {
    d: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl SpherePoly {
    pub fn zero(d: usize) -> Self {
        Self { d, coeffs: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        Self::monomial_with(MultiIndex::zero(d), c)
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n: MultiIndex) -> Self {
        Self::monomial_with(n, Complex64::new(1.0, 0.0))
    }

    pub fn monomial_with(n: MultiIndex, c: Complex64) -> Self {
        let mut p = Self::zero(n.d());
        p.add_term(n, c);
        p
    }

    /// The coordinate function `t_k`, 1-based.
    pub fn coordinate(d: usize, k: usize) -> Self {
        Self::monomial(MultiIndex::unit(d, k))
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(d);
        for (n, c) in terms {
            if n.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: n.len() });
            }
            p.add_term(MultiIndex(n), Complex64::new(c, 0.0));
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Uniform real coefficients in `[-1, 1)` on every monomial of degree `<= degree`.
    pub fn random<R: rand::Rng>(d: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(d);
        for n in MultiIndex::up_to_degree(d, degree) {
            p.add_term(n, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        }
        p
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, n: MultiIndex, c: Complex64) {
        assert_eq!(n.d(), self.d, "multi-index dimension mismatch");
        let slot = self.coeffs.entry(n.clone()).or_default();
        *slot += c;
        if *slot == Complex64::default() {
            self.coeffs.remove(&n);
        }
    }

    pub fn eval(&self, t: &[f64]) -> Complex64 {
        self.coeffs.iter().map(|(n, c)| c * n.eval(t)).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.d);
        for (n, v) in &self.coeffs {
            out.add_term(n.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "sphere dimension mismatch");
        let mut out = self.clone();
        for (n, v) in &other.coeffs {
            out.add_term(n.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "sphere dimension mismatch");
        let mut out = Self::zero(self.d);
        for (n, a) in &self.coeffs {
            for (m, b) in &other.coeffs {
                out.add_term(n.plus(m), a * b);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.d), |acc, _| acc.mul(self))
    }

    pub fn conj(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(n, c)| (n.clone(), c.conj())).collect();
        Self { d: self.d, coeffs }
    }

    /// Exact `int_{S^{d-1}} b` via closed-form monomial moments.
    pub fn integrate(&self) -> Complex64 {
        self.coeffs.iter().map(|(n, c)| c * sphere_moment(n)).sum()
    }

    /// Lipschitz bound on the sphere (chordal metric): `sum |c_n| |n|_1`, which dominates
    /// `sup |grad b|` on the unit ball.
    pub fn lipschitz_bound(&self) -> f64 {
        self.coeffs.iter().map(|(n, c)| c.norm() * n.degree() as f64).sum()
    }

    /// Semantic distance on the sphere: the larger of the sampled sup norm of the difference
    /// and the largest exact moment of the difference against monomials of combined degree.
    pub fn semantic_distance(&self, other: &Self, samples: usize) -> f64 {
        let diff = self.sub(other);
        if diff.is_zero() {
            return 0.0;
        }
        let sup = sample_directions(self.d, samples, 0x5eed).iter().map(|t| diff.eval(t).norm()).fold(0.0, f64::max);
        let deg = diff.degree();
        let moment = MultiIndex::up_to_degree(self.d, deg)
            .into_iter()
            .map(|n| diff.mul(&Self::monomial(n)).integrate().norm())
            .fold(0.0, f64::max);
        sup.max(moment)
    }

    pub fn to_function(&self) -> SphereFunction {
        let p = self.clone();
        SphereFunction::new(self.d, move |t| p.eval(t)).with_lipschitz(self.lipschitz_bound())
    }
}

pub type Evaluator = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A black-box function on `S^{d-1}`, optionally with a Lipschitz constant.
#[derive(Clone)]
pub struct SphereFunction {
    d: usize,
    evaluator: Arc<Evaluator>,
    lipschitz: Option<f64>,
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereFunction").field("d", &self.d).field("lipschitz", &self.lipschitz).finish_non_exhaustive()
    }
}

impl SphereFunction {
    pub fn new(d: usize, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { d, evaluator: Arc::new(f), lipschitz: None }
    }

    pub fn with_lipschitz(mut self, lip: f64) -> Self {
        self.lipschitz = Some(lip);
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn eval(&self, t: &[f64]) -> Complex64 {
        (self.evaluator)(t)
    }

    /// Evaluates the degree-0 homogeneous extension `y(n/|n|)`.
    pub fn eval_direction(&self, v: &[f64]) -> Complex64 {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t: Vec<f64> = v.iter().map(|x| x / r).collect();
        self.eval(&t)
    }
}

impl From<&SpherePoly> for SphereFunction {
    fn from(p: &SpherePoly) -> Self {
        p.to_function()
    }
}
