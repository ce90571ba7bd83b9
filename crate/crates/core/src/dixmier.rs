//! Normalised-trace estimates from log-divergent lattice sums.
//!
//! For a diagonal operator with entries `a_n` on `l^2(Z^d)` whose partial sums grow
//! like `c log N`, every normalised trace returns `c / d`. The estimator divides the
//! growth of `S(N) = sum_{0<|n|<=N} a_n` by the growth of `log K(N)`, where
//! `K(N) = #{0 < |n| <= N}`, which fixes the normalisation without a factor of `d`.

use std::io::Write;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, norm_sq, pairwise_sum, LatticeWindow};
use crate::sphere::{sphere_volume, SphereFunction, SpherePoly};
use crate::symbol::pi2_entry;
use crate::torus::TorusElement;

pub type EntryRule = dyn Fn(&[i64]) -> Complex64 + Send + Sync;

/// Diagonal operator on `l^2(Z^d)` given by an entry rule.
#[derive(Clone)]
pub struct LatticeDiagonal {
    d: usize,
    rule: Arc<EntryRule>,
}

impl std::fmt::Debug for LatticeDiagonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeDiagonal").field("d", &self.d).finish_non_exhaustive()
    }
}

/// Flat, allocation-free evaluator for sphere polynomials on lattice directions.
#[derive(Clone)]
struct CompiledPoly {
    d: usize,
    exps: Vec<u32>,
    coeffs: Vec<Complex64>,
    mean: Complex64,
}

impl CompiledPoly {
    const MAX_D: usize = 16;

    fn new(y: &SpherePoly) -> Result<Self> {
        let d = y.d();
        if d > Self::MAX_D {
            return Err(Error::UnsupportedDimension { rule: "lattice diagonal", d });
        }
        let mut exps = Vec::new();
        let mut coeffs = Vec::new();
        for (n, c) in y.coeffs() {
            exps.extend_from_slice(&n.0);
            coeffs.push(*c);
        }
        Ok(Self { d, exps, coeffs, mean: pi2_entry(y, &vec![0; d]) })
    }

    fn at(&self, n: &[i64], r2: u64) -> Complex64 {
        if r2 == 0 {
            return self.mean;
        }
        let r = (r2 as f64).sqrt();
        let mut t = [0.0f64; Self::MAX_D];
        for (k, &v) in n.iter().enumerate() {
            t[k] = v as f64 / r;
        }
        let mut acc = Complex64::default();
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut m = 1.0;
            for (k, &e) in self.exps[j * self.d..(j + 1) * self.d].iter().enumerate() {
                if e > 0 {
                    m *= t[k].powi(e as i32);
                }
            }
            acc += c * m;
        }
        acc
    }
}

/// `(1 + |n|^2)^{-d/2}`.
pub fn bessel_weight(d: usize, r2: u64) -> f64 {
    let base = 1.0 + r2 as f64;
    let half = base.powi(-((d / 2) as i32));
    if d % 2 == 0 {
        half
    } else {
        half / base.sqrt()
    }
}

impl LatticeDiagonal {
    pub fn new(d: usize, rule: impl Fn(&[i64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { d, rule: Arc::new(rule) }
    }

    /// Entries `y(n/|n|) (1+|n|^2)^{-d/2}`; the origin takes the spherical mean of `y`.
    pub fn symbol_weight(y: &SpherePoly) -> Result<Self> {
        let d = y.d();
        let poly = CompiledPoly::new(y)?;
        Ok(Self::new(d, move |n| {
            let r2 = norm_sq(n);
            poly.at(n, r2) * bessel_weight(d, r2)
        }))
    }

    /// Entries `f(n/|n|) (1+|n|^2)^{-d/2}` for a black-box function; zero at the origin.
    pub fn function_weight(f: &SphereFunction) -> Self {
        let d = f.d();
        let f = f.clone();
        Self::new(d, move |n| match lattice::direction(n) {
            Some(t) => f.eval(&t) * bessel_weight(d, norm_sq(n)),
            None => Complex64::default(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, n: &[i64]) -> Complex64 {
        (self.rule)(n)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let rule = self.rule.clone();
        Self::new(self.d, move |n| rule(n) * c)
    }
}

/// Cumulative sums `S(N_i)` and counts `K(N_i)` for an increasing radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct PartialSums {
    pub grid: Vec<u64>,
    pub sums: Vec<Complex64>,
    pub counts: Vec<u64>,
}

fn check_grid(grid: &[u64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::InvalidArgument(format!("radius grid needs at least {min_len} points")));
    }
    if grid[0] < 1 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radius grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// All partial sums over `0 < |n| <= N_i` in a single pass over the largest ball.
pub fn lattice_partial_sums(diag: &LatticeDiagonal, grid: &[u64]) -> Result<PartialSums> {
    check_grid(grid, 1)?;
    let sq: Vec<u64> = grid.iter().map(|r| r * r).collect();
    let buckets = sq.len();
    let slices = lattice::par_slices(
        diag.d,
        *sq.last().expect("nonempty grid"),
        || (vec![Complex64::default(); buckets], vec![0u64; buckets]),
        |(sums, counts), n| {
            let r2 = norm_sq(n);
            if r2 == 0 {
                return;
            }
            let b = sq.partition_point(|&s| s < r2);
            sums[b] += diag.entry(n);
            counts[b] += 1;
        },
    );
    let mut sums = Vec::with_capacity(buckets);
    let mut counts = Vec::with_capacity(buckets);
    let (mut acc, mut cnt) = (Complex64::default(), 0u64);
    for b in 0..buckets {
        let re: Vec<f64> = slices.iter().map(|s| s.0[b].re).collect();
        let im: Vec<f64> = slices.iter().map(|s| s.0[b].im).collect();
        acc += Complex64::new(pairwise_sum(&re), pairwise_sum(&im));
        cnt += slices.iter().map(|s| s.1[b]).sum::<u64>();
        sums.push(acc);
        counts.push(cnt);
    }
    Ok(PartialSums { grid: grid.to_vec(), sums, counts })
}

/// `S(N) = sum_{0<|n|<=N} a_n`.
pub fn lattice_partial_sum(diag: &LatticeDiagonal, n: u64) -> Result<Complex64> {
    Ok(lattice_partial_sums(diag, &[n])?.sums[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<u64>,
}

/// Least-squares fit of `Re S(N)` against `log N`.
pub fn log_fit(diag: &LatticeDiagonal, grid: &[u64]) -> Result<LogFit> {
    check_grid(grid, 4)?;
    let sums = lattice_partial_sums(diag, grid)?;
    let xs: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = sums.sums.iter().map(|s| s.re).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    Ok(LogFit { slope, intercept, max_residual, n_grid: grid.to_vec() })
}

fn adaptive_panel(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    coarse: &GaussLegendre,
    fine: &GaussLegendre,
    depth: u32,
) -> f64 {
    let lo = coarse.integrate(a, b, f);
    let hi = fine.integrate(a, b, f);
    if (hi - lo).abs() <= 1e-14 * hi.abs().max(1e-3) || depth == 0 {
        return hi;
    }
    let mid = 0.5 * (a + b);
    adaptive_panel(f, a, mid, coarse, fine, depth - 1) + adaptive_panel(f, mid, b, coarse, fine, depth - 1)
}

/// `int_0^N r^{d-1} (1+r^2)^{-d/2} dr - log N`, by adaptive Gauss-Legendre on dyadic panels.
pub fn radial_integral_check(d: usize, n: f64) -> Result<f64> {
    if !(n > 1.0) || d == 0 {
        return Err(Error::InvalidArgument(format!("need N > 1 and d >= 1, got N = {n}, d = {d}")));
    }
    let coarse = GaussLegendre::new(10.try_into().expect("nonzero"));
    let fine = GaussLegendre::new(20.try_into().expect("nonzero"));
    let f = |r: f64| r.powi(d as i32 - 1) * (1.0 + r * r).powf(-(d as f64) / 2.0);
    let mut total = adaptive_panel(&f, 0.0, 1.0, &coarse, &fine, 30);
    let mut a = 1.0;
    while a < n {
        let b = (2.0 * a).min(n);
        total += adaptive_panel(&f, a, b, &coarse, &fine, 30);
        a = b;
    }
    Ok(total - n.ln())
}

/// Trace estimate at radius `N`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEstimate {
    #[serde(rename = "N")]
    pub n: u64,
    /// `[S(N) - S(N/2)] / [log K(N) - log K(N/2)]`.
    pub value: Complex64,
    /// `S(N) / log K(N)`; same limit, with an `O(1/log N)` offset.
    pub ratio: Complex64,
    pub sum: Complex64,
    pub count: u64,
}

fn estimate_from(n: u64, s_half: Complex64, k_half: u64, s: Complex64, k: u64) -> TraceEstimate {
    let (lk, lk_half) = ((k as f64).ln(), (k_half as f64).ln());
    TraceEstimate { n, value: (s - s_half) / (lk - lk_half), ratio: s / lk, sum: s, count: k }
}

/// Normalised-trace estimate of a diagonal operator at radius `N >= 2`.
pub fn normalised_trace_estimate(diag: &LatticeDiagonal, n: u64) -> Result<TraceEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument("trace estimate needs N >= 2".into()));
    }
    let p = lattice_partial_sums(diag, &[n / 2, n])?;
    Ok(estimate_from(n, p.sums[0], p.counts[0], p.sums[1], p.counts[1]))
}

/// Estimates at each radius of a grid (each using its own `N/2`).
pub fn trace_table(diag: &LatticeDiagonal, grid: &[u64]) -> Result<Vec<TraceEstimate>> {
    check_grid(grid, 1)?;
    if grid[0] < 2 {
        return Err(Error::InvalidArgument("trace estimate needs N >= 2".into()));
    }
    let mut all: Vec<u64> = grid.iter().flat_map(|&n| [n / 2, n]).collect();
    all.sort_unstable();
    all.dedup();
    let p = lattice_partial_sums(diag, &all)?;
    let at = |r: u64| {
        let i = all.binary_search(&r).expect("radius in grid");
        (p.sums[i], p.counts[i])
    };
    Ok(grid
        .iter()
        .map(|&n| {
            let (s_half, k_half) = at(n / 2);
            let (s, k) = at(n);
            estimate_from(n, s_half, k_half, s, k)
        })
        .collect())
}

/// CSV with columns `N,S(N),K(N),estimate` (real parts; imaginary parts in extra columns
/// when present).
pub fn write_trace_csv<W: Write>(rows: &[TraceEstimate], mut w: W) -> Result<()> {
    let complex = rows.iter().any(|r| r.sum.im != 0.0 || r.value.im != 0.0);
    if complex {
        writeln!(w, "N,S(N),K(N),estimate,S_im,estimate_im")?;
    } else {
        writeln!(w, "N,S(N),K(N),estimate")?;
    }
    for r in rows {
        if complex {
            writeln!(w, "{},{:e},{},{:e},{:e},{:e}", r.n, r.sum.re, r.count, r.value.re, r.sum.im, r.value.im)?;
        } else {
            writeln!(w, "{},{:e},{},{:e}", r.n, r.sum.re, r.count, r.value.re)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub slope: Option<f64>,
    pub estimate: Complex64,
    pub reference: Complex64,
    pub relative_error: f64,
}

impl TraceSummary {
    pub fn new(slope: Option<f64>, estimate: Complex64, reference: Complex64) -> Self {
        let relative_error = (estimate - reference).norm() / reference.norm().max(0.01);
        Self { slope, estimate, reference, relative_error }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `<e_n, pi_1(x) pi_2(y) (1-Delta)^{-d/2} e_n>` read off the matrix model: the column
/// `pi_1(x) [y(n/|n|) (1+|n|^2)^{-d/2} e_n]` evaluated at row `n`.
fn model_entry(x: &TorusElement, poly: &CompiledPoly, d: usize, n: &[i64]) -> Complex64 {
    let r2 = norm_sq(n);
    let column = poly.at(n, r2) * bessel_weight(d, r2);
    let theta = x.theta();
    let mut acc = Complex64::default();
    for (m, a) in x.coeffs() {
        let row: Vec<i64> = m.iter().zip(n).map(|(p, q)| p + q).collect();
        if row.as_slice() == n {
            acc += a * theta.phase(m, n) * column;
        }
    }
    acc
}

/// Model diagonal of `pi_1(x) pi_2(y) (1-Delta)^{-d/2}` as a lattice diagonal.
pub fn model_diagonal(x: &TorusElement, y: &SpherePoly) -> Result<LatticeDiagonal> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), found: y.d() });
    }
    let d = x.d();
    let poly = CompiledPoly::new(y)?;
    let x = x.clone();
    Ok(LatticeDiagonal::new(d, move |n| model_entry(&x, &poly, d, n)))
}

/// Largest deviation on a window between the model diagonal and
/// `tau(x) y(n/|n|) (1+|n|^2)^{-d/2}`.
pub fn diagonal_identity_residual(x: &TorusElement, y: &SpherePoly, window: &LatticeWindow) -> Result<f64> {
    let model = model_diagonal(x, y)?;
    let tau = x.trace();
    let d = x.d();
    Ok(window
        .points()
        .iter()
        .map(|n| {
            let closed = tau * pi2_entry(y, n) * bessel_weight(d, norm_sq(n));
            (model.entry(n) - closed).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConnesTrace {
    pub estimate: TraceEstimate,
    /// `(1/d) tau(x) int_{S^{d-1}} y`.
    pub reference: Complex64,
}

pub fn connes_trace_torus(x: &TorusElement, y: &SpherePoly, n: u64) -> Result<ConnesTrace> {
    let diag = model_diagonal(x, y)?;
    let estimate = normalised_trace_estimate(&diag, n)?;
    let reference = x.trace() * y.integrate() / x.d() as f64;
    Ok(ConnesTrace { estimate, reference })
}

/// `Vol(S^{d-1}) / d`, the value of every normalised trace on `(1-Delta)^{-d/2}`.
pub fn bessel_trace(d: usize) -> f64 {
    sphere_volume(d) / d as f64
}
