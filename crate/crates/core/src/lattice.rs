//! Integer lattice enumeration with exact squared-radius arithmetic.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Point = Vec<i64>;

pub fn norm_sq(n: &[i64]) -> u64 {
    n.iter().map(|&k| (k * k) as u64).sum()
}

pub fn add(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn neg(a: &[i64]) -> Point {
    a.iter().map(|x| -x).collect()
}

/// Unit vector `n/|n|`; `None` at the origin.
pub fn direction(n: &[i64]) -> Option<Vec<f64>> {
    let r2 = norm_sq(n);
    if r2 == 0 {
        return None;
    }
    let r = (r2 as f64).sqrt();
    Some(n.iter().map(|&k| k as f64 / r).collect())
}

/// Calls `f` for every point of `Z^d` with `|n|^2 <= r2`, first coordinate fixed to `first`.
fn visit_slice(d: usize, r2: u64, prefix: &mut Point, used: u64, f: &mut impl FnMut(&[i64])) {
    if prefix.len() == d {
        f(prefix);
        return;
    }
    let rem = r2 - used;
    let bound = rem.isqrt() as i64;
    for k in -bound..=bound {
        prefix.push(k);
        visit_slice(d, r2, prefix, used + (k * k) as u64, f);
        prefix.pop();
    }
}

/// Visits every lattice point in the closed ball `|n|^2 <= r2`.
pub fn for_each_in_ball(d: usize, r2: u64, mut f: impl FnMut(&[i64])) {
    let mut prefix = Vec::with_capacity(d);
    visit_slice(d, r2, &mut prefix, 0, &mut f);
}

/// Parallel map-reduce over the ball `|n|^2 <= r2`, split by the first coordinate.
///
/// Each slice is folded sequentially with `fold` starting from `init()`; slice results
/// come back in coordinate order so the caller can reduce them deterministically.
pub fn par_slices<T, I, F>(d: usize, r2: u64, init: I, fold: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &[i64]) + Sync,
{
    let bound = r2.isqrt() as i64;
    (-bound..=bound)
        .into_par_iter()
        .map(|k| {
            let mut acc = init();
            let mut prefix = Vec::with_capacity(d);
            prefix.push(k);
            let used = (k * k) as u64;
            if d == 1 {
                fold(&mut acc, &prefix);
            } else {
                visit_slice(d, r2, &mut prefix, used, &mut |p| fold(&mut acc, p));
            }
            acc
        })
        .collect()
}

/// Pairwise summation in a fixed tree; reproducible regardless of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Finite window `{n : |n| <= R}` ordered lexicographically by `(|n|^2, n)`.
#[derive(Debug, Clone)]
pub struct LatticeWindow {
    d: usize,
    radius: u64,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
}

impl LatticeWindow {
    pub fn new(d: usize, radius: u64) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidArgument("window radius must be >= 1".into()));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let mut points = Vec::new();
        for_each_in_ball(d, radius * radius, |p| points.push(p.to_vec()));
        points.sort_by(|a, b| norm_sq(a).cmp(&norm_sq(b)).then_with(|| a.cmp(b)));
        let index = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(Self { d, radius, points, index })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        norm_sq(n) <= self.radius * self.radius
    }
}
