//! Shared test fixtures: the reference parameter set, tolerance-aware
//! comparisons, and quadrature-based oracles that stay independent of the
//! closed-form work integral.
//!
//! Not every test target uses every helper.
#![allow(dead_code)]

use linstroke::model::{net_force, EngineParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reference physics (λ = 1) with the desk-scale stroke limit and mass.
pub fn paper_params() -> EngineParams {
    EngineParams {
        p1_left: 225_000.0,
        p1_right: 120_000.0,
        q_in: 18.0,
        x_s: 0.0225,
        x_m: 0.05,
        bore_left: 0.05,
        lambda: 1.0,
        n_poly: 1.33,
        mass: 1.0,
        friction: 0.0,
    }
}

#[track_caller]
pub fn assert_close(actual: f64, expected: f64, rel: f64, abs: f64, what: &str) {
    let diff = (actual - expected).abs();
    let tol = abs.max(rel * expected.abs());
    assert!(
        diff <= tol,
        "{what}: actual {actual:e}, expected {expected:e}, |diff| = {diff:e} > tol {tol:e}"
    );
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    // The tolerance stays constant down the recursion: halving it per level
    // collides with the rounding floor of the Richardson estimate where the
    // integrand is steep, and the correction term already absorbs the
    // per-interval truncation.
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, m, fm, left, lm, flm, tol, depth - 1)
        + simpson_rec(f, m, fm, b, fb, right, rm, frm, tol, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    simpson_rec(&f, a, fa, b, fb, whole, m, fm, tol, 36)
}

/// Work done by the net force over `[0, x]`, by quadrature only.
pub fn work_by_quadrature(p: &EngineParams, x: f64) -> f64 {
    adaptive_simpson(|u| net_force(u, p).unwrap().net, 0.0, x, 1e-14)
}

/// Energy-balance `x_max` built on quadrature instead of the closed form:
/// `None` when the stroke never starts or carries energy past the guard
/// band edge, otherwise the bisected first positive root of the work curve.
pub fn x_max_by_quadrature(p: &EngineParams, guard_eps: f64) -> Option<f64> {
    if net_force(0.0, p).unwrap().net <= 0.0 {
        return None;
    }
    let edge = p.x_m - guard_eps;
    if work_by_quadrature(p, edge) > 0.0 {
        return None;
    }
    let mut hi = edge;
    let mut lo = None;
    let mut probe = 0.5 * edge;
    for _ in 0..200 {
        if work_by_quadrature(p, probe) > 0.0 {
            lo = Some(probe);
            break;
        }
        hi = probe;
        probe *= 0.5;
    }
    let mut lo = lo?;
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if work_by_quadrature(p, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Deterministic random engine parameters: log-uniform pressures in
/// [5e4, 5e5] Pa, x_s uniform in (0.3, 0.8)·x_m, n in (1.1, 1.6),
/// Q_in in [0, 50] J, λ in [0.5, 2.5], x_m log-uniform in [0.02, 0.3] m.
pub struct ParamGen {
    rng: ChaCha8Rng,
}

impl ParamGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_params(&mut self) -> EngineParams {
        let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
            (rng.random_range(lo.ln()..hi.ln())).exp()
        };
        let x_m = log_uniform(&mut self.rng, 0.02, 0.3);
        EngineParams {
            p1_left: log_uniform(&mut self.rng, 5e4, 5e5),
            p1_right: log_uniform(&mut self.rng, 5e4, 5e5),
            q_in: self.rng.random_range(0.0..50.0),
            x_s: x_m * self.rng.random_range(0.3..0.8),
            x_m,
            bore_left: 0.05,
            lambda: self.rng.random_range(0.5..2.5),
            n_poly: self.rng.random_range(1.1..1.6),
            mass: 1.0,
            friction: 0.0,
        }
    }
}
