use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use ncsym::dixmier::{
    connes_trace_torus, diagonal_identity_residual, log_fit, normalised_trace_estimate, LatticeDiagonal,
};
use ncsym::lattice::LatticeWindow;
use ncsym::linalg::{random_antisymmetric, RMat};
use ncsym::moyal::{
    ccr_phase, ccr_phase_residual, h_decay_profile, multiplier_identity_residual, riesz_difference_decay, GridUnitary,
};
use ncsym::sphere::{moment_recursion_check, sphere_volume, MomentFunctional, QuadratureRule, SpherePoly};
use ncsym::su2::{build_block, conjugation_covariance_check, eta, pauli_exp, su2_dixmier_ratio, BWord};
use ncsym::symbol::{commutator_tail_norm, random_word, residual_compactness_report};
use ncsym::symplectic::{antisymmetric_normal_form, random_symplectic, sp_invariance_residuals, sp_theta_conjugate};
use ncsym::torus::{ThetaMatrix, TorusElement};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CliError, Suite, VerifyConfig};
use crate::report::{Record, VerifyReport};

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn max_abs(m: impl IntoIterator<Item = f64>) -> f64 {
    m.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn theta_matrix(cfg: &VerifyConfig) -> RMat {
    let d = cfg.d;
    let mut m = RMat::zeros(d, d);
    let mut it = cfg.theta.iter();
    for i in 0..d {
        for j in i + 1..d {
            let v = *it.next().expect("theta length checked");
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

fn rng(cfg: &VerifyConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(stream);
    r
}

/// Runs the configured suite and collects its records.
pub fn run_suite(cfg: &VerifyConfig) -> Result<VerifyReport, CliError> {
    let start = Instant::now();
    let records = match cfg.suite {
        Suite::TorusTrace => torus_trace(cfg)?,
        Suite::Su2 => su2(cfg)?,
        Suite::Moments => moments(cfg)?,
        Suite::Symplectic => symplectic(cfg)?,
        Suite::Moyal => moyal(cfg)?,
        Suite::SymbolCompactness => symbol_compactness(cfg)?,
    };
    Ok(VerifyReport::new(cfg.suite.to_string(), records, start.elapsed().as_secs_f64(), cfg.echo()))
}

fn torus_trace(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let d = cfg.d;
    if cfg.nmax < 32 {
        return Err(bad("torus-trace needs nmax >= 32"));
    }
    let one = LatticeDiagonal::symbol_weight(&SpherePoly::one(d))?;
    let grid: Vec<u64> = (0..5).rev().map(|k| cfg.nmax >> k).collect();
    let fit = log_fit(&one, &grid)?;
    let est = normalised_trace_estimate(&one, cfg.nmax)?;
    let vol = sphere_volume(d);
    let mut out = vec![
        Record::relative("slope", fit.slope, vol, cfg.tol("slope"), 0.0),
        Record::relative("normalised_trace", est.value.re, vol / d as f64, cfg.tol("normalised_trace"), 0.0),
    ];

    let theta = Arc::new(ThetaMatrix::from_upper(d, &cfg.theta)?);
    let mut r = rng(cfg, 1);
    let window = LatticeWindow::new(d, 8)?;
    let n = cfg.nmax.min(1024);
    let mut identity = 0.0f64;
    for k in 0..cfg.samples {
        let x = TorusElement::random(theta.clone(), 2, 4, &mut r);
        let y = SpherePoly::random(d, 4, &mut r);
        let ct = connes_trace_torus(&x, &y, n)?;
        let rel = (ct.estimate.value - ct.reference).norm() / ct.reference.norm().max(0.01);
        out.push(Record::new(format!("connes_{k}"), rel, 0.0, cfg.tol("connes")));
        identity = identity.max(diagonal_identity_residual(&x, &y, &window)?);
    }
    out.push(Record::new("diagonal_identity", identity, 0.0, cfg.tol("diagonal_identity")));
    Ok(out)
}

fn random_su2<R: Rng>(r: &mut R) -> nalgebra::Matrix2<Complex64> {
    pauli_exp(3, r.gen_range(-PI..PI)) * pauli_exp(2, r.gen_range(-PI..PI)) * pauli_exp(3, r.gen_range(-PI..PI))
}

fn su2(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let w: BWord = cfg.word.parse()?;
    let tr = su2_dixmier_ratio(&w, cfg.lmax)?;
    let block = build_block(cfg.lmax);
    let casimir: BWord = "b1^2+b2^2+b3^2".parse()?;
    let c = casimir.evaluate(&block);
    let dim = block.dim();
    let mut cas = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            cas = cas.max((c[(i, j)] - target).norm());
        }
    }
    let l = cfg.lmax.value();
    let comm = ncsym::su2::block_commutator_norm(&block, 1, 2)?;
    let mut cov = 0.0f64;
    for j in 1..=3 {
        cov = cov.max(conjugation_covariance_check(&block, j, 0.7)?);
    }
    let mut r = rng(cfg, 2);
    let mut eta_res = 0.0f64;
    for _ in 0..cfg.samples {
        let (g, h) = (random_su2(&mut r), random_su2(&mut r));
        let lhs = eta(&(g * h))?;
        let rhs = eta(&h)? * eta(&g)?;
        eta_res = eta_res.max((lhs - rhs).amax());
    }
    let last = tr.rows.last().expect("rows up to lmax");
    Ok(vec![
        Record::relative("ratio", tr.estimate.re, tr.reference.re, cfg.tol("ratio"), 0.5),
        Record::new("ratio_imag", tr.estimate.im, tr.reference.im, cfg.tol("ratio_imag")),
        Record::new("casimir", cas, 0.0, cfg.tol("casimir")),
        Record::new("commutator", comm, if l > 0.0 { 1.0 / (l + 1.0) } else { 0.0 }, cfg.tol("commutator")),
        Record::new("covariance", cov, 0.0, cfg.tol("covariance")),
        Record::new("eta", eta_res, 0.0, cfg.tol("eta")),
        Record::new("intertwining", last.intertwining_residual, 0.0, cfg.tol("intertwining")),
    ])
}

fn moments(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let (d, deg) = (cfg.d, cfg.max_degree);
    let exact = moment_recursion_check(&MomentFunctional::exact(d, deg + 2), deg)?;
    let mut out = vec![
        Record::new("odd_vanishing", exact.max_odd(), 0.0, cfg.tol("odd_vanishing")),
        Record::new("first_reduction", exact.max_first(), 0.0, cfg.tol("first_reduction")),
        Record::new("main_reduction", exact.max_main(), 0.0, cfg.tol("main_reduction")),
    ];
    if d <= 4 {
        let n = deg as usize;
        let rule = QuadratureRule::product(n + 4, 2 * n + 8);
        let quad = moment_recursion_check(&MomentFunctional::from_quadrature(d, deg + 2, &rule)?, deg)?;
        out.push(Record::new("quadrature", quad.max_residual(), 0.0, cfg.tol("quadrature")));
    }
    Ok(out)
}

fn symplectic(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let d = cfg.d;
    let theta = theta_matrix(cfg);
    let mut r = rng(cfg, 3);
    let mut nf_res = antisymmetric_normal_form(&theta)?.residual;
    for _ in 0..cfg.samples {
        nf_res = nf_res.max(antisymmetric_normal_form(&random_antisymmetric(d, &mut r))?.residual);
    }
    let beta = antisymmetric_normal_form(&theta)?.beta;
    let mut gs = Vec::with_capacity(cfg.samples);
    let mut member = 0.0f64;
    for _ in 0..cfg.samples {
        let h = sp_theta_conjugate(&random_symplectic(d, 0.3, &mut r)?, &beta, &theta)?;
        member = member.max(max_abs((h.transpose() * &theta * &h - &theta).iter().copied()));
        gs.push(h);
    }
    let mut out = vec![
        Record::new("normal_form", nf_res, 0.0, cfg.tol("normal_form")),
        Record::new("membership", member, 0.0, cfg.tol("membership")),
    ];
    let rule = match d {
        2 => Some(QuadratureRule::fine(2)),
        4 => Some(QuadratureRule::product(32, 64)),
        _ => None,
    };
    if let Some(rule) = rule {
        let rep = sp_invariance_residuals(&gs, cfg.max_degree.min(4), &rule)?;
        out.push(Record::new("invariance", rep.max_residual, 0.0, cfg.tol("invariance")));
    }
    Ok(out)
}

fn moyal(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    if cfg.d != 2 {
        return Err(bad("moyal suite runs in d = 2"));
    }
    let theta = theta_matrix(cfg);
    let grid = GridUnitary::new(theta.clone(), 10, 0.5)?;
    let mut r = rng(cfg, 4);
    let (mut ccr, mut anti) = (0.0f64, 0.0f64);
    for _ in 0..cfg.samples {
        let t: Vec<f64> = (0..2).map(|_| r.gen_range(-4i32..=4) as f64 * 0.5).collect();
        let s: Vec<f64> = (0..2).map(|_| r.gen_range(-4i32..=4) as f64 * 0.5).collect();
        ccr = ccr.max(ccr_phase_residual(&t, &s, &grid)?);
        anti = anti.max((ccr_phase(&t, &s, &theta) * ccr_phase(&s, &t, &theta) - 1.0).norm());
    }
    let g = random_symplectic(2, 0.5, &mut r)?;
    let b = SpherePoly::coordinate(2, 1).mul(&SpherePoly::coordinate(2, 2));
    let mult = multiplier_identity_residual(&g, &b, 2000, cfg.seed)?;
    let h = h_decay_profile(&g, &[10.0, 100.0, 1000.0], &[1000, 2000], 2000)?;
    let p: Vec<f64> = h.profile.iter().map(|s| s.value).collect();
    let c: Vec<f64> = h.cell_sums.iter().map(|s| s.value).collect();
    let riesz = riesz_difference_decay(1, 2, &[10.0, 100.0, 1000.0], 500)?;
    let q: Vec<f64> = riesz.iter().map(|s| s.value).collect();
    Ok(vec![
        Record::new("ccr_phase", ccr, 0.0, cfg.tol("ccr_phase")),
        Record::new("ccr_antisymmetry", anti, 0.0, cfg.tol("ccr_antisymmetry")),
        Record::new("multiplier_identity", mult, 0.0, cfg.tol("multiplier_identity")),
        Record::new("h_decay", p[1].max(p[2]) / p[0].max(p[1]), 0.0, cfg.tol("h_decay")),
        Record::new("h_shell_convergence", p[2] / p[1] - 1.0, 0.0, cfg.tol("h_shell_convergence")),
        Record::new("h_cell_convergence", c[1] / c[0] - 1.0, 0.0, cfg.tol("h_cell_convergence")),
        Record::new("riesz_limit", q[2], 0.5, cfg.tol("riesz_limit")),
        Record::new("riesz_decay", q[1].max(q[2]) / q[0].max(q[1]), 0.0, cfg.tol("riesz_decay")),
    ])
}

fn symbol_compactness(cfg: &VerifyConfig) -> Result<Vec<Record>, CliError> {
    let radii = &cfg.radii;
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] == 0 {
        return Err(bad("radii must be at least two increasing positive values"));
    }
    let d = cfg.d;
    let theta = Arc::new(ThetaMatrix::from_upper(d, &cfg.theta)?);
    let mut unit = vec![0i64; d];
    unit[0] = 1;
    let x = TorusElement::unitary(theta.clone(), &unit);
    let t1 = SpherePoly::coordinate(d, 1).to_function();
    let tails =
        radii.iter().map(|&r| Ok(commutator_tail_norm(&x, &t1, r)?.value)).collect::<Result<Vec<f64>, CliError>>()?;
    let mut out: Vec<Record> = radii
        .windows(2)
        .zip(tails.windows(2))
        .map(|(r, t)| Record::new(format!("tail_ratio_{}", r[1]), t[0] / t[1], 2.0, cfg.tol("tail_ratio")))
        .collect();
    let mut r = rng(cfg, 5);
    for k in 0..cfg.samples {
        let w = random_word(theta.clone(), 4, &mut r)?;
        let rep = residual_compactness_report(&w, radii)?;
        let worst =
            rep.tail_norm.windows(2).map(|p| p[1] / p[0]).fold(0.0, |a: f64, b| if b.is_nan() { b } else { a.max(b) });
        out.push(Record::new(format!("word_{k}_decrease"), worst, 0.0, cfg.tol("word_decrease")));
    }
    Ok(out)
}
