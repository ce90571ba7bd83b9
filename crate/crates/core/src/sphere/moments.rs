//! Closed-form monomial moments on `S^{d-1}` and the moment-recursion identities
//! satisfied by symplectically invariant functionals.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::poly::{MultiIndex, SpherePoly};
use crate::sphere::quadrature::{quadrature_integrate, QuadratureRule};

/// `Gamma(k/2)` for integer `k >= 1`, by the functional equation from `Gamma(1/2)` or `Gamma(1)`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "Gamma(k/2) needs k >= 1");
    let (mut value, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// `Vol(S^{d-1}) = 2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_volume(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

/// `int_{S^{d-1}} prod t_k^{n_k} dt`: zero if some `n_k` is odd, otherwise
/// `2 prod Gamma((n_k+1)/2) / Gamma((|n|+d)/2)`.
pub fn sphere_moment(n: &MultiIndex) -> f64 {
    if n.has_odd() {
        return 0.0;
    }
    let num: f64 = n.0.iter().map(|&k| gamma_half(k + 1)).product();
    2.0 * num / gamma_half(n.degree() + n.d() as u32)
}

/// Tabulated values `l(b_n)` of a linear functional on monomials.
#[derive(Debug, Clone)]
pub struct MomentFunctional {
    d: usize,
    max_degree: u32,
    values: BTreeMap<MultiIndex, Complex64>,
}

impl MomentFunctional {
    /// The exact surface measure `m`.
    pub fn exact(d: usize, max_degree: u32) -> Self {
        let values = MultiIndex::up_to_degree(d, max_degree)
            .into_iter()
            .map(|n| {
                let v = sphere_moment(&n);
                (n, Complex64::new(v, 0.0))
            })
            .collect();
        Self { d, max_degree, values }
    }

    /// Monomial moments estimated by a quadrature rule.
    pub fn from_quadrature(d: usize, max_degree: u32, rule: &QuadratureRule) -> Result<Self> {
        let mut values = BTreeMap::new();
        for n in MultiIndex::up_to_degree(d, max_degree) {
            let f = SpherePoly::monomial(n.clone()).to_function();
            values.insert(n, quadrature_integrate(&f, rule)?.value);
        }
        Ok(Self { d, max_degree, values })
    }

    pub fn from_values(d: usize, values: BTreeMap<MultiIndex, Complex64>) -> Result<Self> {
        let max_degree = values.keys().map(MultiIndex::degree).max().unwrap_or(0);
        for n in MultiIndex::up_to_degree(d, max_degree) {
            if !values.contains_key(&n) {
                return Err(Error::InvalidArgument(format!("moment table is missing {n}")));
            }
        }
        Ok(Self { d, max_degree, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn get(&self, n: &MultiIndex) -> Option<Complex64> {
        self.values.get(n).copied()
    }

    /// Applies the functional to a polynomial whose degree fits the table.
    pub fn apply(&self, b: &SpherePoly) -> Result<Complex64> {
        let mut acc = Complex64::default();
        for (n, c) in b.coeffs() {
            let v = self.get(n).ok_or_else(|| {
                Error::InvalidArgument(format!("monomial {n} exceeds table degree {}", self.max_degree))
            })?;
            acc += c * v;
        }
        Ok(acc)
    }

    /// CSV with columns `n_1..n_d,value` (plus `value_im` when any entry is complex).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let complex = self.values.values().any(|v| v.im != 0.0);
        let mut header: Vec<String> = (1..=self.d).map(|k| format!("n_{k}")).collect();
        header.push("value".into());
        if complex {
            header.push("value_im".into());
        }
        writeln!(w, "{}", header.join(","))?;
        for (n, v) in &self.values {
            let mut row: Vec<String> = n.0.iter().map(|k| k.to_string()).collect();
            row.push(format!("{:e}", v.re));
            if complex {
                row.push(format!("{:e}", v.im));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Residuals of the three moment identities at one multi-index.
#[derive(Debug, Clone, Serialize)]
pub struct RecursionRow {
    pub n: Vec<u32>,
    /// `|l(b_n)|` when some entry of `n` is odd, else 0.
    pub odd_vanishing: f64,
    /// Max over pairs `k` of `|l(b_{n+2e_{2k-1}}) - (n_{2k-1}+1)/(n_{2k}+1) l(b_{n+2e_{2k}})|`.
    pub first_reduction: f64,
    /// Max over `k` of `|l(b_{n+2e_k}) - (n_k+1)/(|n|+d) l(b_n)|`.
    pub main_reduction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionReport {
    pub d: usize,
    pub max_degree: u32,
    pub rows: Vec<RecursionRow>,
}

impl RecursionReport {
    pub fn max_odd(&self) -> f64 {
        self.rows.iter().map(|r| r.odd_vanishing).fold(0.0, f64::max)
    }

    pub fn max_first(&self) -> f64 {
        self.rows.iter().map(|r| r.first_reduction).fold(0.0, f64::max)
    }

    pub fn max_main(&self) -> f64 {
        self.rows.iter().map(|r| r.main_reduction).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.max_odd().max(self.max_first()).max(self.max_main())
    }
}

/// Checks the odd-vanishing, pairwise-reduction and degree-raising identities for every
/// multi-index of degree `<= max_degree`. The table must reach `max_degree + 2`.
pub fn moment_recursion_check(l: &MomentFunctional, max_degree: u32) -> Result<RecursionReport> {
    let d = l.d();
    if d % 2 != 0 {
        return Err(Error::InvalidArgument(format!("recursions need even d, got {d}")));
    }
    if l.max_degree() < max_degree + 2 {
        return Err(Error::InvalidArgument(format!("table degree {} < required {}", l.max_degree(), max_degree + 2)));
    }
    let at = |n: &MultiIndex| l.get(n).expect("table covers degree");
    let rows = MultiIndex::up_to_degree(d, max_degree)
        .into_iter()
        .map(|n| {
            let odd_vanishing = if n.has_odd() { at(&n).norm() } else { 0.0 };
            let mut first_reduction = 0.0f64;
            for k in 1..=d / 2 {
                let (a, b) = (n.0[2 * k - 2] as f64, n.0[2 * k - 1] as f64);
                let lhs = at(&n.bump(2 * k - 1, 2));
                let rhs = at(&n.bump(2 * k, 2)) * ((a + 1.0) / (b + 1.0));
                first_reduction = first_reduction.max((lhs - rhs).norm());
            }
            let mut main_reduction = 0.0f64;
            let denom = (n.degree() as usize + d) as f64;
            for k in 1..=d {
                let lhs = at(&n.bump(k, 2));
                let rhs = at(&n) * ((n.0[k - 1] as f64 + 1.0) / denom);
                main_reduction = main_reduction.max((lhs - rhs).norm());
            }
            RecursionRow { n: n.0, odd_vanishing, first_reduction, main_reduction }
        })
        .collect();
    Ok(RecursionReport { d, max_degree, rows })
}
