//! Spin-block matrix models for the SU(2) example.
//!
//! On the spin-`l` irrep, `D_1 = 2J_z` (diagonal), `D_2 = 2J_x`, `D_3 = 2J_y`, so that
//! `[D_1, D_2] = 2i D_3` cyclically and `D_1^2 + D_2^2 + D_3^2 = 4l(l+1)`. The order-zero
//! generators are `b_k = D_k / sqrt(4l(l+1))`. On the trivial block `l = 0` every
//! `b_k` is taken to be `1/sqrt(3)`, which keeps `b_1^2 + b_2^2 + b_3^2 = 1`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMat, RMat};
use crate::sphere::{gamma_half, sample_directions, MultiIndex, SpherePoly};

const UNITARY_TOL: f64 = 1e-10;

/// `l = twice / 2`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfInteger {
    pub twice: u32,
}

impl HalfInteger {
    pub fn new(twice: u32) -> Self {
        Self { twice }
    }

    pub fn integer(l: u32) -> Self {
        Self { twice: 2 * l }
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// `l(l+1)`.
    pub fn casimir(self) -> f64 {
        let l = self.value();
        l * (l + 1.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a half-integer: {s}"));
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(bad());
            }
            return num.trim().parse().map(Self::new).map_err(|_| bad());
        }
        let v: f64 = s.trim().parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if v < 0.0 || twice.fract() != 0.0 {
            return Err(bad());
        }
        Ok(Self::new(twice as u32))
    }
}

/// Band representation of one generator on a block: `diag` and the symmetric pair
/// `(upper, lower)` with `T[i][i+1] = upper[i]`, `T[i+1][i] = lower[i]`.
#[derive(Debug, Clone)]
struct Band {
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    lower: Vec<Complex64>,
}

impl Band {
    fn dense(&self) -> CMat {
        let n = self.diag.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
                m[(i + 1, i)] = self.lower[i];
            }
        }
        m
    }

    /// `M T`.
    fn right_multiply(&self, m: &CMat) -> CMat {
        let n = self.diag.len();
        let mut out = CMat::zeros(m.nrows(), n);
        for j in 0..n {
            for r in 0..m.nrows() {
                let mut acc = m[(r, j)] * self.diag[j];
                if j > 0 {
                    acc += m[(r, j - 1)] * self.upper[j - 1];
                }
                if j + 1 < n {
                    acc += m[(r, j + 1)] * self.lower[j];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }
}

/// One irreducible block with its generators.
#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub l: HalfInteger,
    pub d1: CMat,
    pub d2: CMat,
    pub d3: CMat,
    /// `l(l+1)`.
    pub laplacian_eig: f64,
    /// `(2l+1)^2`.
    pub peter_weyl_weight: u64,
    bands: [Band; 3],
}

/// Builds the spin-`l` block, basis ordered by `m = -l, ..., l`.
pub fn build_block(l: HalfInteger) -> IrrepBlock {
    let n = l.dim();
    let lv = l.value();
    let cas = l.casimir();
    let ladder: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| {
            let m = i as f64 - lv;
            (cas - m * (m + 1.0)).max(0.0).sqrt()
        })
        .collect();
    let zero = Complex64::default();
    let d_bands = [
        Band {
            diag: (0..n).map(|i| Complex64::new(2.0 * (i as f64 - lv), 0.0)).collect(),
            upper: vec![zero; n.saturating_sub(1)],
            lower: vec![zero; n.saturating_sub(1)],
        },
        Band {
            diag: vec![zero; n],
            upper: ladder.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
            lower: ladder.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        },
        Band {
            diag: vec![zero; n],
            upper: ladder.iter().map(|&c| Complex64::new(0.0, c)).collect(),
            lower: ladder.iter().map(|&c| Complex64::new(0.0, -c)).collect(),
        },
    ];
    let b_bands = if l.twice == 0 {
        let v = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
        [0, 1, 2].map(|_| Band { diag: vec![v], upper: vec![], lower: vec![] })
    } else {
        let s = 1.0 / (4.0 * cas).sqrt();
        d_bands.clone().map(|b| Band {
            diag: b.diag.iter().map(|c| c * s).collect(),
            upper: b.upper.iter().map(|c| c * s).collect(),
            lower: b.lower.iter().map(|c| c * s).collect(),
        })
    };
    let [d1, d2, d3] = [&d_bands[0], &d_bands[1], &d_bands[2]].map(Band::dense);
    IrrepBlock { l, d1, d2, d3, laplacian_eig: cas, peter_weyl_weight: (n * n) as u64, bands: b_bands }
}

impl IrrepBlock {
    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    /// `D_k`, 1-based.
    pub fn d(&self, k: usize) -> &CMat {
        match k {
            1 => &self.d1,
            2 => &self.d2,
            3 => &self.d3,
            _ => panic!("generator index {k} out of range 1..=3"),
        }
    }

    /// `b_k`, 1-based.
    pub fn b(&self, k: usize) -> CMat {
        self.bands[k - 1].dense()
    }

    /// Eigenvalues of `b_1` in basis order.
    pub fn b1_eigenvalues(&self) -> Vec<f64> {
        self.bands[0].diag.iter().map(|c| c.re).collect()
    }

    fn times_b(&self, m: &CMat, k: usize) -> CMat {
        self.bands[k - 1].right_multiply(m)
    }
}

/// `||[b_j, b_k]||` on a block; `1/(l+1)` for `j != k` and `l > 0`.
pub fn block_commutator_norm(block: &IrrepBlock, j: usize, k: usize) -> Result<f64> {
    for i in [j, k] {
        if !(1..=3).contains(&i) {
            return Err(Error::IndexOutOfRange { index: i, dim: 3 });
        }
    }
    let (bj, bk) = (block.b(j), block.b(k));
    Ok(op_norm(&(&bj * &bk - &bk * &bj)))
}

/// Pauli matrices with the labelling `sigma_1 = diag(1,-1)`, `sigma_2 = [[0,-i],[i,0]]`,
/// `sigma_3 = [[0,1],[1,0]]`.
pub fn pauli(k: usize) -> Matrix2<Complex64> {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::default(), Complex64::i());
    match k {
        1 => Matrix2::new(o, z, z, -o),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(z, o, o, z),
        _ => panic!("Pauli index {k} out of range 1..=3"),
    }
}

/// `exp(i s sigma_k)`.
pub fn pauli_exp(k: usize, s: f64) -> Matrix2<Complex64> {
    let (sn, cs) = s.sin_cos();
    Matrix2::identity() * Complex64::new(cs, 0.0) + pauli(k) * Complex64::new(0.0, sn)
}

/// `eta(g)_{kj} = 1/2 tr(g sigma_k g^* sigma_j)` for `g` in SU(2).
///
/// With this index order `eta(gh) = eta(h) eta(g)` and `g sigma_j g^* = sum_k eta(g)_{jk} sigma_k`.
pub fn eta(g: &Matrix2<Complex64>) -> Result<RMat> {
    let unit = (g.adjoint() * g - Matrix2::identity()).norm();
    let det = (g.determinant() - Complex64::new(1.0, 0.0)).norm();
    if unit > UNITARY_TOL || det > UNITARY_TOL {
        return Err(Error::NotSpecialUnitary(unit.max(det)));
    }
    let ga = g.adjoint();
    Ok(RMat::from_fn(3, 3, |k, j| (g * pauli(k + 1) * ga * pauli(j + 1)).trace().re / 2.0))
}

/// `max_k || e^{isD_j} D_k e^{-isD_j} - sum_m eta(e^{is sigma_j})_{mk} D_m ||`.
pub fn conjugation_covariance_check(block: &IrrepBlock, j: usize, s: f64) -> Result<f64> {
    if !(1..=3).contains(&j) {
        return Err(Error::IndexOutOfRange { index: j, dim: 3 });
    }
    let e = eta(&pauli_exp(j, s))?;
    let u = (block.d(j) * Complex64::new(0.0, s)).exp();
    let ua = u.adjoint();
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let lhs = &u * block.d(k) * &ua;
        let mut rhs = CMat::zeros(block.dim(), block.dim());
        for m in 1..=3 {
            rhs += block.d(m) * Complex64::new(e[(m - 1, k - 1)], 0.0);
        }
        worst = worst.max(op_norm(&(lhs - rhs)));
    }
    Ok(worst)
}

/// Pinching onto the `D_1` eigenspaces: the diagonal part, since `D_1` has simple spectrum.
pub fn block_conditional_expectation(block: &IrrepBlock, m: &CMat) -> Result<CMat> {
    let n = block.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
    }
    Ok(CMat::from_diagonal(&m.diagonal()))
}

/// Linear combination of words in `b_1, b_2, b_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct BWord {
    terms: Vec<(Complex64, Vec<u8>)>,
}

impl BWord {
    pub fn one() -> Self {
        Self { terms: vec![(Complex64::new(1.0, 0.0), vec![])] }
    }

    /// Single word; letters are 1-based generator indices.
    pub fn word(letters: &[u8]) -> Result<Self> {
        if let Some(&k) = letters.iter().find(|k| !(1..=3).contains(*k)) {
            return Err(Error::IndexOutOfRange { index: k as usize, dim: 3 });
        }
        Ok(Self { terms: vec![(Complex64::new(1.0, 0.0), letters.to_vec())] })
    }

    /// `b_1^{n1} b_2^{n2} b_3^{n3}`.
    pub fn monomial(n1: u32, n2: u32, n3: u32) -> Self {
        let mut letters = vec![1u8; n1 as usize];
        letters.extend(std::iter::repeat(2u8).take(n2 as usize));
        letters.extend(std::iter::repeat(3u8).take(n3 as usize));
        Self { terms: vec![(Complex64::new(1.0, 0.0), letters)] }
    }

    pub fn terms(&self) -> &[(Complex64, Vec<u8>)] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { terms: self.terms.iter().map(|(a, w)| (a * c, w.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (a, w) in &self.terms {
            for (b, v) in &other.terms {
                let mut letters = w.clone();
                letters.extend_from_slice(v);
                terms.push((a * b, letters));
            }
        }
        Self { terms }
    }

    pub fn max_length(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// The operator on a block.
    pub fn evaluate(&self, block: &IrrepBlock) -> CMat {
        let n = block.dim();
        let mut out = CMat::zeros(n, n);
        for (c, w) in &self.terms {
            let mut p = CMat::identity(n, n);
            for &k in w {
                p = block.times_b(&p, k as usize);
            }
            out += p * *c;
        }
        out
    }
}

impl FromStr for BWord {
    type Err = Error;

    /// Parses sums such as `b1b1`, `b1^2+b2^2+b3^2`, `b1b2 - b2b1`, `0.5*b3^4`, `1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("cannot parse word '{s}': {msg}"));
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(bad("empty"));
        }
        let mut terms = Vec::new();
        let mut rest = src.as_str();
        while !rest.is_empty() {
            let mut sign = 1.0;
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                sign = -1.0;
                rest = r;
            }
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let (term, tail) = rest.split_at(end);
            rest = tail;
            let (coef, body) = match term.find('b') {
                Some(0) => (1.0, term),
                Some(p) => {
                    let c = term[..p].trim_end_matches('*');
                    (c.parse::<f64>().map_err(|_| bad("bad coefficient"))?, &term[p..])
                }
                None => (term.parse::<f64>().map_err(|_| bad("bad constant"))?, ""),
            };
            let mut letters = Vec::new();
            let mut chars = body.chars().peekable();
            while let Some(ch) = chars.next() {
                if ch == '*' {
                    continue;
                }
                if ch != 'b' {
                    return Err(bad("expected 'b'"));
                }
                let k = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(|| bad("missing generator index"))?;
                if !(1..=3).contains(&k) {
                    return Err(bad("generator index must be 1, 2 or 3"));
                }
                let mut power = 1u32;
                if chars.peek() == Some(&'^') {
                    chars.next();
                    let mut digits = String::new();
                    while let Some(c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                        digits.push(*c);
                        chars.next();
                    }
                    power = digits.parse().map_err(|_| bad("bad exponent"))?;
                }
                letters.extend(std::iter::repeat(k as u8).take(power as usize));
            }
            terms.push((Complex64::new(sign * coef, 0.0), letters));
        }
        Ok(Self { terms })
    }
}

/// Replaces every `b_k` by the commuting coordinate `t_k` on `S^2`.
pub fn su2_symbol(w: &BWord) -> SpherePoly {
    let mut p = SpherePoly::zero(3);
    for (c, letters) in &w.terms {
        let mut n = MultiIndex::zero(3);
        for &k in letters {
            n = n.bump(k as usize, 1);
        }
        p.add_term(n, *c);
    }
    p
}

/// `B((n2+1)/2, (n3+1)/2) / pi` for even `n2, n3`, else 0: the average of
/// `t_2^{n2} t_3^{n3}` over the circle `t_2^2 + t_3^2 = 1`.
pub fn circle_average_coefficient(n2: u32, n3: u32) -> f64 {
    if n2 % 2 == 1 || n3 % 2 == 1 {
        return 0.0;
    }
    gamma_half(n2 + 1) * gamma_half(n3 + 1) / (gamma_half(n2 + n3 + 2) * std::f64::consts::PI)
}

/// Conditional expectation of a sphere polynomial onto functions of `t_1`, evaluated at `x`.
pub fn circle_conditional_expectation(p: &SpherePoly, x: f64) -> Complex64 {
    p.coeffs()
        .iter()
        .map(|(n, c)| {
            let (n1, n2, n3) = (n.0[0], n.0[1], n.0[2]);
            let coef = circle_average_coefficient(n2, n3);
            if coef == 0.0 {
                return Complex64::default();
            }
            c * coef * x.powi(n1 as i32) * (1.0 - x * x).max(0.0).powi(((n2 + n3) / 2) as i32)
        })
        .sum()
}

/// `sup_m |diag(E(w(b)))_m - E(sym w)(x_m)|` on the spin-`l` block.
pub fn intertwining_residual(block: &IrrepBlock, w: &BWord) -> f64 {
    let op = w.evaluate(block);
    let sym = su2_symbol(w);
    block
        .b1_eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &x)| (op[(i, i)] - circle_conditional_expectation(&sym, x)).norm())
        .fold(0.0, f64::max)
}

/// Residual of the Beta-function formula for `E(b_1^{n1} b_2^{n2} b_3^{n3})` on the spin-`l` block.
pub fn beta_formula_residual(l: HalfInteger, n1: u32, n2: u32, n3: u32) -> f64 {
    intertwining_residual(&build_block(l), &BWord::monomial(n1, n2, n3))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormGap {
    pub l: HalfInteger,
    pub block_norm: f64,
    pub symbol_sup: f64,
    pub gap: f64,
}

/// Sampled `sup |p|` on `S^2`, coordinate poles included.
pub fn symbol_sup(p: &SpherePoly, samples: usize) -> f64 {
    let mut pts = sample_directions(3, samples, 3);
    for k in 0..3 {
        for s in [1.0, -1.0] {
            let mut t = vec![0.0; 3];
            t[k] = s;
            pts.push(t);
        }
    }
    pts.par_iter().map(|t| p.eval(t).norm()).reduce(|| 0.0, f64::max)
}

/// `| ||w(b)||_block - ||sym w||_inf |` for each `l`.
pub fn block_norm_vs_symbol(ls: &[HalfInteger], w: &BWord) -> Vec<NormGap> {
    let sup = symbol_sup(&su2_symbol(w), 200_000);
    ls.par_iter()
        .map(|&l| {
            let block_norm = op_norm(&w.evaluate(&build_block(l)));
            NormGap { l, block_norm, symbol_sup: sup, gap: (block_norm - sup).abs() }
        })
        .collect()
}

/// Per-block data for the trace ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockRow {
    pub l: HalfInteger,
    pub block_trace: Complex64,
    /// `(2l+1)^2 (1 + l(l+1))^{-3/2}`.
    pub weight: f64,
    pub intertwining_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Su2Trace {
    /// Ratio restricted to the shell `L/2 < l <= L`.
    pub estimate: Complex64,
    /// Ratio over all blocks `0 <= l <= L`.
    pub cumulative: Complex64,
    /// `(1/4pi) int_{S^2} sym(w)`.
    pub reference: Complex64,
    pub abs_error: f64,
    pub rows: Vec<BlockRow>,
}

fn block_weight(l: HalfInteger) -> f64 {
    let dim = l.dim() as f64;
    dim * dim * (1.0 + l.casimir()).powf(-1.5)
}

/// Ratio of `sum (2l+1) tr(w(b)) (1+l(l+1))^{-3/2}` to `sum (2l+1)^2 (1+l(l+1))^{-3/2}`
/// over `l = 0, 1/2, ..., L`.
pub fn su2_dixmier_ratio(w: &BWord, l_max: HalfInteger) -> Result<Su2Trace> {
    if l_max.twice < 4 {
        return Err(Error::InvalidArgument("trace ratio needs L >= 2".into()));
    }
    let rows: Vec<BlockRow> = (0..=l_max.twice)
        .into_par_iter()
        .map(|twice| {
            let l = HalfInteger::new(twice);
            let block = build_block(l);
            let op = w.evaluate(&block);
            let sym = su2_symbol(w);
            let residual = block
                .b1_eigenvalues()
                .iter()
                .enumerate()
                .map(|(i, &x)| (op[(i, i)] - circle_conditional_expectation(&sym, x)).norm())
                .fold(0.0, f64::max);
            BlockRow { l, block_trace: op.trace(), weight: block_weight(l), intertwining_residual: residual }
        })
        .collect();
    let ratio = |from: u32| {
        let (mut num, mut den) = (Complex64::default(), 0.0);
        for r in rows.iter().filter(|r| r.l.twice >= from) {
            let dim = r.l.dim() as f64;
            num += r.block_trace * (r.weight / dim);
            den += r.weight;
        }
        num / den
    };
    let estimate = ratio(l_max.twice / 2 + 1);
    let cumulative = ratio(0);
    let reference = su2_symbol(w).integrate() / (4.0 * std::f64::consts::PI);
    Ok(Su2Trace { estimate, cumulative, reference, abs_error: (estimate - reference).norm(), rows })
}

/// CSV with columns `l,block_trace,block_trace_im,weight,intertwining_residual`.
pub fn write_block_csv<W: Write>(rows: &[BlockRow], mut w: W) -> Result<()> {
    writeln!(w, "l,block_trace,block_trace_im,weight,intertwining_residual")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            r.l, r.block_trace.re, r.block_trace.im, r.weight, r.intertwining_residual
        )?;
    }
    Ok(())
}
