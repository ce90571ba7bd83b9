//! The torus instance of the symbol map: operator words in `pi_1(C(T^d_theta))` and
//! `pi_2(C(S^{d-1}))` acting on `l^2(Z^d)`, their symbols in the algebraic tensor
//! product, and numerical certificates that commutators are compact.
//!
//! Representation on the basis `{e_n}`:
//! `pi_1(u_m) e_n = e^{(i/2)(m, theta n)} e_{m+n}` and `pi_2(y) e_n = y(n/|n|) e_n`,
//! with `pi_2(y) e_0` set to the normalised spherical mean of `y` (any value at the
//! origin changes `pi_2(y)` by a rank-one operator).

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, for_each_in_ball, norm_sq, LatticeWindow, Point};
use crate::linalg::CMat;
use crate::sphere::{sample_directions, sphere_volume, SphereFunction, SpherePoly};
use crate::torus::{ThetaMatrix, TorusElement};

/// Finite sum `sum_k x_k (x) y_k` in `C(T^d_theta) (x) C(S^{d-1})`.
#[derive(Debug, Clone)]
pub struct Symbol {
    theta: Arc<ThetaMatrix>,
    terms: Vec<(TorusElement, SpherePoly)>,
}

impl Symbol {
    pub fn zero(theta: Arc<ThetaMatrix>) -> Self {
        Self { theta, terms: Vec::new() }
    }

    pub fn elementary(x: TorusElement, y: SpherePoly) -> Result<Self> {
        if x.d() != y.d() {
            return Err(Error::DimensionMismatch { expected: x.d(), found: y.d() });
        }
        Ok(Self { theta: x.theta().clone(), terms: vec![(x, y)] })
    }

    /// `1 (x) 1`.
    pub fn one(theta: Arc<ThetaMatrix>) -> Self {
        let d = theta.d();
        Self { theta: theta.clone(), terms: vec![(TorusElement::identity(theta), SpherePoly::one(d))] }
    }

    pub fn d(&self) -> usize {
        self.theta.d()
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix> {
        &self.theta
    }

    pub fn terms(&self) -> &[(TorusElement, SpherePoly)] {
        &self.terms
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.theta == other.theta {
            Ok(())
        } else {
            Err(Error::ThetaMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { theta: self.theta.clone(), terms })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(x, y)| (x.scale(c), y.clone())).collect();
        Self { theta: self.theta.clone(), terms }
    }

    /// Pairwise product `(x (x) y)(x' (x) y') = x x' (x) y y'`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (x, y) in &self.terms {
            for (x2, y2) in &other.terms {
                terms.push((x.mul(x2)?, y.mul(y2)));
            }
        }
        Ok(Self { theta: self.theta.clone(), terms })
    }

    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|(x, y)| (x.adjoint(), y.conj())).collect();
        Self { theta: self.theta.clone(), terms }
    }

    /// Collects the symbol by torus frequency: `n -> sum_k (x_k)_n y_k`.
    pub fn by_frequency(&self) -> BTreeMap<Point, SpherePoly> {
        let mut out: BTreeMap<Point, SpherePoly> = BTreeMap::new();
        for (x, y) in &self.terms {
            for (n, c) in x.coeffs() {
                let slot = out.entry(n.clone()).or_insert_with(|| SpherePoly::zero(self.d()));
                *slot = slot.add(&y.scale(*c));
            }
        }
        out
    }

    /// Semantic distance between two symbols, frequency by frequency.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        let a = self.by_frequency();
        let b = other.by_frequency();
        let zero = SpherePoly::zero(self.d());
        let mut worst = 0.0f64;
        for n in a.keys().chain(b.keys()) {
            let pa = a.get(n).unwrap_or(&zero);
            let pb = b.get(n).unwrap_or(&zero);
            worst = worst.max(pa.semantic_distance(pb, 256));
        }
        Ok(worst)
    }

    /// `(tau (x) id)(sym)`, i.e. `sum_k tau(x_k) y_k`.
    pub fn trace_slice(&self) -> SpherePoly {
        self.terms.iter().fold(SpherePoly::zero(self.d()), |acc, (x, y)| acc.add(&y.scale(x.trace())))
    }

    /// `(tau (x) int_{S^{d-1}})(sym)`.
    pub fn integrate(&self) -> Complex64 {
        self.trace_slice().integrate()
    }
}

#[derive(Debug, Clone)]
pub enum Letter {
    P1(TorusElement),
    P2(SpherePoly),
}

impl Letter {
    fn d(&self) -> usize {
        match self {
            Letter::P1(x) => x.d(),
            Letter::P2(y) => y.d(),
        }
    }

    fn adjoint(&self) -> Self {
        match self {
            Letter::P1(x) => Letter::P1(x.adjoint()),
            Letter::P2(y) => Letter::P2(y.conj()),
        }
    }
}

/// Ordered product of `pi_1` and `pi_2` letters.
#[derive(Debug, Clone)]
pub struct OperatorWord {
    theta: Arc<ThetaMatrix>,
    letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new(theta: Arc<ThetaMatrix>, letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("operator word must be nonempty".into()));
        }
        for l in &letters {
            if l.d() != theta.d() {
                return Err(Error::DimensionMismatch { expected: theta.d(), found: l.d() });
            }
            if let Letter::P1(x) = l {
                if **x.theta() != *theta {
                    return Err(Error::ThetaMismatch);
                }
            }
        }
        Ok(Self { theta, letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn theta(&self) -> &Arc<ThetaMatrix> {
        &self.theta
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Self::new(self.theta.clone(), letters)
    }

    pub fn adjoint(&self) -> Self {
        let letters = self.letters.iter().rev().map(Letter::adjoint).collect();
        Self { theta: self.theta.clone(), letters }
    }

    /// Largest shift any column can undergo (sum of `P1` support radii).
    pub fn reach(&self) -> f64 {
        self.letters
            .iter()
            .map(|l| match l {
                Letter::P1(x) => x.support_radius(),
                Letter::P2(_) => 0.0,
            })
            .sum()
    }
}

/// The symbol of a word: product of `x (x) 1` and `1 (x) y` over the letters.
pub fn sym(word: &OperatorWord) -> Result<Symbol> {
    let theta = word.theta.clone();
    let d = theta.d();
    let mut acc = Symbol::one(theta.clone());
    for l in &word.letters {
        let factor = match l {
            Letter::P1(x) => Symbol::elementary(x.clone(), SpherePoly::one(d))?,
            Letter::P2(y) => Symbol::elementary(TorusElement::identity(theta.clone()), y.clone())?,
        };
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// Normal-ordered word `sum_k pi_1(x_k) pi_2(y_k)` representing a symbol.
pub fn normal_ordered(symbol: &Symbol) -> Vec<(TorusElement, SpherePoly)> {
    symbol.terms().to_vec()
}

type SparseVec = HashMap<Point, Complex64>;

/// `pi_2(y)` entry at `n`; the origin gets the normalised spherical mean.
pub fn pi2_entry(y: &SpherePoly, n: &[i64]) -> Complex64 {
    match lattice::direction(n) {
        Some(t) => y.eval(&t),
        None => y.integrate() / sphere_volume(y.d()),
    }
}

fn apply_pi1(x: &TorusElement, v: &SparseVec) -> SparseVec {
    let theta = x.theta();
    let mut out = SparseVec::with_capacity(v.len() * x.support_len());
    for (n, c) in v {
        for (m, a) in x.coeffs() {
            *out.entry(lattice::add(m, n)).or_default() += a * c * theta.phase(m, n);
        }
    }
    out
}

fn apply_pi2(y: &SpherePoly, v: &mut SparseVec) {
    for (n, c) in v.iter_mut() {
        *c *= pi2_entry(y, n);
    }
}

/// Column `W e_n` of a word.
pub fn word_column(word: &OperatorWord, n: &[i64]) -> SparseVec {
    let mut v = SparseVec::new();
    v.insert(n.to_vec(), Complex64::new(1.0, 0.0));
    for l in word.letters.iter().rev() {
        match l {
            Letter::P1(x) => v = apply_pi1(x, &v),
            Letter::P2(y) => apply_pi2(y, &mut v),
        }
    }
    v
}

/// Column of `W - sum_k pi_1(x_k) pi_2(y_k)` where `sum_k x_k (x) y_k = sym(W)`.
fn residual_column(word: &OperatorWord, normal: &[(TorusElement, SpherePoly)], n: &[i64]) -> SparseVec {
    let mut col = word_column(word, n);
    for (x, y) in normal {
        let coeff = pi2_entry(y, n);
        if coeff == Complex64::default() {
            continue;
        }
        let theta = x.theta();
        for (m, a) in x.coeffs() {
            *col.entry(lattice::add(m, n)).or_default() -= a * coeff * theta.phase(m, n);
        }
    }
    col
}

/// Dense window matrix of `pi_1(x)` plus the column mass that leaves the window.
#[derive(Debug, Clone)]
pub struct Pi1Matrix {
    pub matrix: CMat,
    /// `sum over columns of sum |entries outside the window|^2`.
    pub escaped_mass: f64,
    /// Largest escaped column mass (squared norm).
    pub max_column_escape: f64,
}

pub fn build_pi1_matrix(x: &TorusElement, window: &LatticeWindow) -> Result<Pi1Matrix> {
    if x.d() != window.d() {
        return Err(Error::DimensionMismatch { expected: window.d(), found: x.d() });
    }
    if x.support_radius() > window.radius() as f64 {
        return Err(Error::InvalidArgument(format!(
            "window radius {} is below the support radius {:.3}",
            window.radius(),
            x.support_radius()
        )));
    }
    let size = window.len();
    let theta = x.theta();
    let mut matrix = CMat::zeros(size, size);
    let mut escaped_mass = 0.0;
    let mut max_column_escape = 0.0f64;
    for (j, n) in window.points().iter().enumerate() {
        let mut escaped = 0.0;
        for (m, a) in x.coeffs() {
            let target = lattice::add(m, n);
            let v = a * theta.phase(m, n);
            match window.index_of(&target) {
                Some(i) => matrix[(i, j)] += v,
                None => escaped += v.norm_sqr(),
            }
        }
        escaped_mass += escaped;
        max_column_escape = max_column_escape.max(escaped);
    }
    Ok(Pi1Matrix { matrix, escaped_mass, max_column_escape })
}

/// Diagonal window matrix of `pi_2(y)`.
pub fn build_pi2_matrix(y: &SpherePoly, window: &LatticeWindow) -> Result<CMat> {
    if y.d() != window.d() {
        return Err(Error::DimensionMismatch { expected: window.d(), found: y.d() });
    }
    let diag: Vec<Complex64> = window.points().iter().map(|n| pi2_entry(y, n)).collect();
    Ok(CMat::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Tail norm of `[pi_1(x), pi_2(y)]` on `{|n| > R}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailNorm {
    /// Certified upper bound; equals the exact norm when `exact` holds and `x` is a single term.
    pub value: f64,
    /// Largest entry found on the scanned shell (a lower bound for single-term `x`).
    pub shell_sup: f64,
    /// Outer radius of the scanned shell.
    pub scanned_radius: f64,
    /// Whether the Lipschitz remainder bound fell below the shell supremum.
    pub exact: bool,
}

fn direction_value(y: &SphereFunction, n: &[i64], mean: Complex64) -> Complex64 {
    match lattice::direction(n) {
        Some(t) => y.eval(&t),
        None => mean,
    }
}

/// `sup_{|n| > R} |y((n+m)/|n+m|) - y(n/|n|)|` for one shift `m`, scanned shell by shell
/// until the bound `2 Lip(y) |m| / R_out` on the unscanned remainder drops below the
/// shell supremum.
fn single_shift_tail(y: &SphereFunction, m: &[i64], r: u64, lip: f64, mean: Complex64) -> TailNorm {
    let d = m.len();
    let mnorm = (norm_sq(m) as f64).sqrt();
    if mnorm == 0.0 || lip == 0.0 {
        return TailNorm { value: 0.0, shell_sup: 0.0, scanned_radius: r as f64, exact: true };
    }
    let mut inner = r;
    let mut outer = 2 * r + 2 * mnorm.ceil() as u64 + 1;
    let mut sup = 0.0f64;
    loop {
        let (lo, hi) = (inner * inner, outer * outer);
        let parts = lattice::par_slices(
            d,
            hi,
            || 0.0f64,
            |acc, n| {
                let r2 = norm_sq(n);
                if r2 <= lo {
                    return;
                }
                let shifted = lattice::add(n, m);
                let diff = direction_value(y, &shifted, mean) - direction_value(y, n, mean);
                *acc = acc.max(diff.norm());
            },
        );
        sup = parts.into_iter().fold(sup, f64::max);
        let remainder = 2.0 * lip * mnorm / outer as f64;
        if remainder <= sup {
            return TailNorm { value: sup, shell_sup: sup, scanned_radius: outer as f64, exact: true };
        }
        if outer > 16 * r.max(1) + 64 {
            return TailNorm { value: remainder, shell_sup: sup, scanned_radius: outer as f64, exact: false };
        }
        inner = outer;
        outer *= 2;
    }
}

/// Norm of `[pi_1(x), pi_2(y)]` restricted to `{|n| > R}`.
///
/// For `x = c u_m` this is `|c| sup_{|n|>R} |y((n+m)/|n+m|) - y(n/|n|)|`; for general
/// `x` the single-shift values are aggregated with the triangle inequality.
pub fn commutator_tail_norm(x: &TorusElement, y: &SphereFunction, r: u64) -> Result<TailNorm> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), found: y.d() });
    }
    let lip = y.lipschitz().ok_or(Error::MissingLipschitz)?;
    let mean = Complex64::default();
    let mut total = TailNorm { value: 0.0, shell_sup: 0.0, scanned_radius: r as f64, exact: true };
    for (m, c) in x.coeffs() {
        let t = single_shift_tail(y, m, r, lip, mean);
        total.value += c.norm() * t.value;
        total.shell_sup = total.shell_sup.max(c.norm() * t.shell_sup);
        total.scanned_radius = total.scanned_radius.max(t.scanned_radius);
        total.exact &= t.exact;
    }
    Ok(total)
}

/// Residual norms of a word against its normal-ordered symbol, per tail radius.
#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    #[serde(rename = "R")]
    pub radii: Vec<u64>,
    /// Lower estimate of the tail norm (power iteration and column norms on the shell).
    pub tail_norm: Vec<f64>,
    /// Upper bound on the shell: sum over shifts of the largest multiplier.
    pub shell_upper: Vec<f64>,
    /// Least-squares slope of `log tail_norm` against `log R`.
    pub fit_slope: f64,
}

struct ShellOperator {
    d: usize,
    columns: Vec<Point>,
    col_start: Vec<usize>,
    entries: Vec<(usize, Complex64)>,
    shifts: Vec<Point>,
    box_radius: i64,
}

impl ShellOperator {
    fn box_len(&self) -> usize {
        (2 * self.box_radius as usize + 1).pow(self.d as u32)
    }

    fn box_index(&self, p: &[i64]) -> usize {
        let side = 2 * self.box_radius + 1;
        p.iter().fold(0i64, |acc, &k| acc * side + (k + self.box_radius)) as usize
    }

    fn row_index(&self, col: usize, shift: usize) -> usize {
        let p = lattice::add(&self.columns[col], &self.shifts[shift]);
        self.box_index(&p)
    }

    fn apply(&self, v: &[Complex64], rows: &[Vec<usize>]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.box_len()];
        for (j, vj) in v.iter().enumerate() {
            for (k, (_, a)) in self.entries[self.col_start[j]..self.col_start[j + 1]].iter().enumerate() {
                out[rows[j][k]] += a * vj;
            }
        }
        out
    }

    fn apply_adjoint(&self, w: &[Complex64], rows: &[Vec<usize>]) -> Vec<Complex64> {
        (0..self.columns.len())
            .into_par_iter()
            .map(|j| {
                self.entries[self.col_start[j]..self.col_start[j + 1]]
                    .iter()
                    .enumerate()
                    .map(|(k, (_, a))| a.conj() * w[rows[j][k]])
                    .sum()
            })
            .collect()
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn shell_operator(word: &OperatorWord, normal: &[(TorusElement, SpherePoly)], r: u64, outer: u64) -> ShellOperator {
    let d = word.theta.d();
    let mut columns = Vec::new();
    let lo = r * r;
    for_each_in_ball(d, outer * outer, |n| {
        if norm_sq(n) > lo {
            columns.push(n.to_vec());
        }
    });
    let cols: Vec<Vec<(Point, Complex64)>> = columns
        .par_iter()
        .map(|n| {
            let mut col: Vec<(Point, Complex64)> = residual_column(word, normal, n)
                .into_iter()
                .filter(|(_, v)| v.norm() > 1e-14)
                .map(|(p, v)| (lattice::add(&p, &lattice::neg(n)), v))
                .collect();
            col.sort_by(|a, b| a.0.cmp(&b.0));
            col
        })
        .collect();
    let mut shift_ids: BTreeMap<Point, usize> = BTreeMap::new();
    let mut shifts = Vec::new();
    let mut col_start = Vec::with_capacity(columns.len() + 1);
    let mut entries = Vec::new();
    col_start.push(0);
    for col in cols {
        for (s, v) in col {
            let id = *shift_ids.entry(s.clone()).or_insert_with(|| {
                shifts.push(s);
                shifts.len() - 1
            });
            entries.push((id, v));
        }
        col_start.push(entries.len());
    }
    let reach = word.reach().ceil() as i64 + 1;
    ShellOperator { d, columns, col_start, entries, shifts, box_radius: outer as i64 + reach }
}

/// Lower and upper estimates of the shell-restricted residual norm.
fn shell_norm(op: &ShellOperator, seed: u64) -> (f64, f64) {
    let ncols = op.columns.len();
    if op.entries.is_empty() {
        return (0.0, 0.0);
    }
    let rows: Vec<Vec<usize>> = (0..ncols)
        .map(|j| op.entries[op.col_start[j]..op.col_start[j + 1]].iter().map(|(s, _)| op.row_index(j, *s)).collect())
        .collect();
    let mut col_max = 0.0f64;
    let mut shift_sup = vec![0.0f64; op.shifts.len()];
    for j in 0..ncols {
        let col = &op.entries[op.col_start[j]..op.col_start[j + 1]];
        col_max = col_max.max(col.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt());
        for (s, a) in col {
            shift_sup[*s] = shift_sup[*s].max(a.norm());
        }
    }
    let upper: f64 = shift_sup.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> =
        (0..ncols).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let mut best = 0.0f64;
    let mut prev = 0.0f64;
    for _ in 0..200 {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|c| *c /= nv);
        let w = op.apply(&v, &rows);
        let est = norm2(&w);
        best = best.max(est);
        v = op.apply_adjoint(&w, &rows);
        if (est - prev).abs() <= 1e-9 * est {
            break;
        }
        prev = est;
    }
    (best.max(col_max), upper)
}

/// For each `R`, the norm of `W - sum_k pi_1(x_k) pi_2(y_k)` on the columns
/// `R < |n| <= R + max(4 reach, R/4)`, where `sum_k x_k (x) y_k = sym(W)`.
pub fn residual_compactness_report(word: &OperatorWord, radii: &[u64]) -> Result<CompactnessReport> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("radius list is empty".into()));
    }
    let symbol = sym(word)?;
    let normal = normal_ordered(&symbol);
    let reach = word.reach().ceil() as u64;
    let mut tail_norm = Vec::with_capacity(radii.len());
    let mut shell_upper = Vec::with_capacity(radii.len());
    for &r in radii {
        let outer = r + (4 * reach).max(r / 4).max(2);
        let op = shell_operator(word, &normal, r, outer);
        let (lo, hi) = shell_norm(&op, 0x7a11 ^ r);
        tail_norm.push(lo);
        shell_upper.push(hi);
    }
    let fit_slope = log_log_slope(radii, &tail_norm);
    Ok(CompactnessReport { radii: radii.to_vec(), tail_norm, shell_upper, fit_slope })
}

/// Random word of `len` letters alternating `pi_2(y), pi_1(x), ...`, with `x` a two-term
/// element of frequency `|n|_inf <= 1` and `y` a random polynomial of degree `<= 2`.
pub fn random_word<R: Rng>(theta: Arc<ThetaMatrix>, len: usize, rng: &mut R) -> Result<OperatorWord> {
    let d = theta.d();
    let mut letters = Vec::with_capacity(len);
    for k in 0..len {
        if k % 2 == 0 {
            let mut y = SpherePoly::zero(d);
            for a in 0..d {
                y = y.add(&SpherePoly::coordinate(d, a + 1).scale(Complex64::new(rng.gen_range(-1.0..1.0), 0.0)));
                let b = rng.gen_range(0..d);
                let quad = SpherePoly::coordinate(d, a + 1).mul(&SpherePoly::coordinate(d, b + 1));
                y = y.add(&quad.scale(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))));
            }
            letters.push(Letter::P2(y));
        } else {
            let mut terms = Vec::with_capacity(2);
            while terms.len() < 2 {
                let n: Vec<i64> = (0..d).map(|_| rng.gen_range(-1..=1)).collect();
                if n.iter().any(|&v| v != 0) && terms.iter().all(|(m, _)| *m != n) {
                    terms.push((n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
            letters.push(Letter::P1(TorusElement::from_terms(theta.clone(), terms)?));
        }
    }
    OperatorWord::new(theta, letters)
}

fn log_log_slope(radii: &[u64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        radii.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(r, v)| ((*r as f64).ln(), v.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Averaging witness for injectivity of the symbol map on a word's symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InjectivityWitness {
    /// Norm on the window of the averaged operator `pi_2(sum_k tau(x_k) y_k)`.
    pub window_norm: f64,
    /// `max |sum_k tau(x_k) y_k(s)|` over sampled unit vectors `s`.
    pub direction_max: f64,
}

pub fn injectivity_witness(symbol: &Symbol, window: &LatticeWindow, samples: usize) -> Result<InjectivityWitness> {
    let d = symbol.d();
    let vol = (2.0 * std::f64::consts::PI).powi(d as i32);
    let averaged =
        symbol.terms().iter().fold(SpherePoly::zero(d), |acc, (x, y)| acc.add(&y.scale(x.translate_average() / vol)));
    let pi2 = build_pi2_matrix(&averaged, window)?;
    let window_norm = pi2.diagonal().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let direction_max = sample_directions(d, samples, 17).iter().map(|t| averaged.eval(t).norm()).fold(0.0, f64::max);
    Ok(InjectivityWitness { window_norm, direction_max })
}
