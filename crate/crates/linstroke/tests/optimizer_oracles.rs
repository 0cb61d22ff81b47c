//! Search-loop oracles: the energy x_max against quadrature, the iteration
//! mechanics against the printed rules, brute-force sweep cross-checks and
//! the x_m calibration outcomes.

// The frozen constants keep their 40-digit arbitrary-precision spellings;
// they round to the nearest f64.
#![allow(clippy::excessive_precision)]

mod support;

use linstroke::dynamics::{IntegratorConfig, Termination};
use linstroke::error::EngineError;
use linstroke::optimizer::{
    calibrate_xm, optimize_bore_scale, search_direction, sweep, update_step, x_max_energy,
    CalibrationStatus, OptimizationResult, OptimizationStatus, SearchConfig, StepRule, Strategy,
};
use proptest::prelude::*;
use support::{assert_close, paper_params, x_max_by_quadrature, ParamGen};

// Frozen 40-digit evaluations on the reference physics.
const X_MAX_REFERENCE: f64 = 0.012336988721934635; // λ = 1, x_m = 0.05
const LAMBDA_STAR_DESK: f64 = 0.8595725816403071; // x_m = 0.05
const LAMBDA_STAR_XM1: f64 = 1.3379938308923711; // x_m = 1.0
const LAMBDA_NO_MOTION: f64 = 1.1816976213489042; // net(0) = 0 at x_m = 0.05
const PAPER_TARGET: f64 = 1.461;

fn default_cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

/// Structural invariants every trace must satisfy, straight from the
/// printed rules.
fn check_trace(result: &OptimizationResult, sc: &SearchConfig, x_s: f64) {
    let trace = &result.trace;
    assert!(!trace.is_empty());
    let mut contracted_seen = false;
    for (i, rec) in trace.iter().enumerate() {
        assert_eq!(rec.j, i);
        assert_eq!(rec.j_value.to_bits(), (rec.x_max - x_s).abs().to_bits());
        assert_eq!(rec.p, search_direction(rec.x_max, x_s));
        assert!(rec.lambda >= sc.lambda_min && rec.lambda <= sc.lambda_max);
        assert!(rec.s > 0.0);
    }
    for w in trace.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let raw = prev.lambda + prev.p as f64 * prev.s;
        let clamped = raw.clamp(sc.lambda_min, sc.lambda_max);
        assert_eq!(
            next.lambda.to_bits(),
            clamped.to_bits(),
            "iterate identity λ_{{j+1}} = clamp(λ_j + p_j·s_j) violated at j = {}",
            prev.j
        );
        assert_eq!(next.clamped, raw != clamped);
        match next.rule {
            StepRule::Contracted => {
                contracted_seen = true;
                let ratio = next.s / prev.s;
                assert!(
                    ratio > 0.0 && ratio < 1.0,
                    "contraction ratio {ratio} outside (0,1) at j = {}",
                    next.j
                );
                // Contraction requires a strict bracketing product.
                assert!((x_s - prev.x_max) * (x_s - next.x_max) < 0.0);
            }
            StepRule::Held => assert_eq!(next.s.to_bits(), prev.s.to_bits()),
        }
        if contracted_seen {
            assert!(next.s <= prev.s, "step grew after first contraction");
        }
        // Direction flips only when x_max crosses x_s.
        if next.p != prev.p {
            assert!((x_s - prev.x_max) * (x_s - next.x_max) < 0.0 || next.x_max == x_s);
        }
    }
}

#[test]
fn energy_root_matches_reference_and_quadrature() {
    let p = paper_params();
    let (x, term) = x_max_energy(&p, 1e-5).unwrap();
    assert_eq!(term, Termination::PeakFound);
    assert_close(x, X_MAX_REFERENCE, 0.0, 1e-10, "energy root, frozen");
    let xq = x_max_by_quadrature(&p, 1e-5).unwrap();
    assert_close(x, xq, 0.0, 1e-8, "energy root vs quadrature route");
}

#[test]
fn energy_root_hits_design_stroke_at_lambda_star() {
    let p = paper_params().with_lambda(LAMBDA_STAR_DESK);
    let (x, term) = x_max_energy(&p, 1e-5).unwrap();
    assert_eq!(term, Termination::PeakFound);
    assert_close(x, p.x_s, 0.0, 1e-9, "x_max(λ*) = x_s");
}

#[test]
fn energy_route_classifies_no_motion_and_overtravel() {
    let p = paper_params().with_lambda(LAMBDA_NO_MOTION + 0.01);
    assert_eq!(
        x_max_energy(&p, 1e-5).unwrap(),
        (0.0, Termination::NoMotion)
    );

    let p = paper_params().with_lambda(0.1);
    let (x, term) = x_max_energy(&p, 1e-5).unwrap();
    assert_eq!(term, Termination::Overtravel);
    assert_eq!(x, p.x_m - 1e-5);
}

#[test]
fn energy_route_sees_no_motion_at_pressure_balance() {
    // With q_in = 0 the pressure forces balance at x = 0 for
    // λ² = (p1_left/p1_right)·(x_m/(x_m+x_s))^n. A hair above that, the
    // rest force is negative beyond any rounding of the balance itself.
    let mut p = paper_params();
    p.q_in = 0.0;
    p.lambda = ((p.p1_left / p.p1_right) * (p.x_m / (p.x_m + p.x_s)).powf(p.n_poly)).sqrt()
        * (1.0 + 1e-9);
    assert_eq!(
        x_max_energy(&p, 1e-5).unwrap(),
        (0.0, Termination::NoMotion)
    );
}

#[test]
fn energy_route_agrees_with_quadrature_on_random_params() {
    let mut gen = ParamGen::new(41);
    let mut checked = 0;
    while checked < 10 {
        let p = gen.next_params();
        let (x, term) = x_max_energy(&p, 1e-6).unwrap();
        if term != Termination::PeakFound {
            continue;
        }
        let xq = x_max_by_quadrature(&p, 1e-6).expect("oracle should see motion too");
        assert_close(x, xq, 0.0, 1e-8, "energy vs quadrature");
        checked += 1;
    }
}

#[test]
fn optimize_stops_immediately_when_already_converged() {
    let p = paper_params();
    let sc = SearchConfig {
        lambda_init: LAMBDA_STAR_DESK,
        ..SearchConfig::default()
    };
    let res = optimize_bore_scale(&p, &sc, &default_cfg(), Strategy::Energy).unwrap();
    assert_eq!(res.status, OptimizationStatus::Converged);
    assert_eq!(res.iterations(), 0);
    assert_eq!(res.lambda_star, LAMBDA_STAR_DESK);
}

#[test]
fn optimize_identifies_desk_bore_scale_from_both_initializations() {
    let p = paper_params();
    let cfg = default_cfg();
    let from_one = optimize_bore_scale(&p, &SearchConfig::default(), &cfg, Strategy::Energy).unwrap();
    assert_eq!(from_one.status, OptimizationStatus::Converged);
    assert!(from_one.iterations() <= 200);
    assert_close(from_one.lambda_star, LAMBDA_STAR_DESK, 0.0, 1e-3, "λ* from λ₀ = 1");
    assert!((from_one.x_max_star - p.x_s).abs() <= 1e-6);
    check_trace(&from_one, &SearchConfig::default(), p.x_s);

    let sc2 = SearchConfig {
        lambda_init: 2.0,
        ..SearchConfig::default()
    };
    let from_two = optimize_bore_scale(&p, &sc2, &cfg, Strategy::Energy).unwrap();
    assert_eq!(from_two.status, OptimizationStatus::Converged);
    assert!(
        (from_one.lambda_star - from_two.lambda_star).abs() <= 1e-3,
        "both initializations reach the same limit"
    );
    check_trace(&from_two, &sc2, p.x_s);
}

#[test]
fn ode_and_energy_strategies_agree() {
    let p = paper_params();
    let cfg = default_cfg();
    let sc = SearchConfig::default();
    let ode = optimize_bore_scale(&p, &sc, &cfg, Strategy::Ode).unwrap();
    let energy = optimize_bore_scale(&p, &sc, &cfg, Strategy::Energy).unwrap();
    assert_eq!(ode.status, OptimizationStatus::Converged);
    assert!(
        (ode.lambda_star - energy.lambda_star).abs() <= 1e-4,
        "strategy mismatch: {} vs {}",
        ode.lambda_star,
        energy.lambda_star
    );
    check_trace(&ode, &sc, p.x_s);
}

#[test]
fn optimize_traces_are_deterministic() {
    let p = paper_params();
    let sc = SearchConfig::default();
    let cfg = default_cfg();
    let a = optimize_bore_scale(&p, &sc, &cfg, Strategy::Ode).unwrap();
    let b = optimize_bore_scale(&p, &sc, &cfg, Strategy::Ode).unwrap();
    assert_eq!(a, b);
}

#[test]
fn optimize_sticks_at_bound_when_root_is_outside() {
    // λ* ≈ 0.86 lies below these bounds; the search pins to lambda_min.
    let p = paper_params();
    let sc = SearchConfig {
        lambda_init: 1.0,
        lambda_min: 1.0,
        lambda_max: 1.2,
        ..SearchConfig::default()
    };
    let res = optimize_bore_scale(&p, &sc, &default_cfg(), Strategy::Energy).unwrap();
    assert_eq!(res.status, OptimizationStatus::BoundStuck);
    assert_eq!(res.lambda_star, 1.0);
    check_trace(&res, &sc, p.x_s);
}

#[test]
fn optimize_reports_step_underflow() {
    let p = paper_params();
    let sc = SearchConfig {
        step_init: 5e-10, // below tol_s after the first held update
        ..SearchConfig::default()
    };
    let res = optimize_bore_scale(&p, &sc, &default_cfg(), Strategy::Energy).unwrap();
    assert_eq!(res.status, OptimizationStatus::StepUnderflow);
    assert!(res.trace.last().unwrap().j_value > sc.tol_j);
}

#[test]
fn optimize_respects_iteration_budget() {
    let p = paper_params();
    let sc = SearchConfig {
        max_iter: 0,
        ..SearchConfig::default()
    };
    let res = optimize_bore_scale(&p, &sc, &default_cfg(), Strategy::Energy).unwrap();
    assert_eq!(res.status, OptimizationStatus::MaxIterations);
    assert_eq!(res.iterations(), 0);

    let sc = SearchConfig {
        max_iter: 3,
        ..SearchConfig::default()
    };
    let res = optimize_bore_scale(&p, &sc, &default_cfg(), Strategy::Energy).unwrap();
    assert_eq!(res.status, OptimizationStatus::MaxIterations);
    assert_eq!(res.iterations(), 3);
}

#[test]
fn optimize_propagates_evaluation_failures_with_lambda() {
    let p = paper_params();
    let mut cfg = default_cfg();
    cfg.t_max = 1e-4; // no stroke can finish
    let err = optimize_bore_scale(&p, &SearchConfig::default(), &cfg, Strategy::Ode).unwrap_err();
    match err {
        EngineError::EvalFailed { lambda, source } => {
            assert_eq!(lambda, 1.0);
            assert!(matches!(*source, EngineError::HorizonExceeded { .. }));
        }
        other => panic!("expected EvalFailed, got {other:?}"),
    }
}

#[test]
fn initialization_points_reach_the_same_limit() {
    let p = paper_params();
    let cfg = default_cfg();
    let bounds = (0.5, 2.0);
    let mut stars = Vec::new();
    for lambda_init in [bounds.0, 0.5 * (bounds.0 + bounds.1), bounds.1] {
        let sc = SearchConfig {
            lambda_init,
            lambda_min: bounds.0,
            lambda_max: bounds.1,
            ..SearchConfig::default()
        };
        let res = optimize_bore_scale(&p, &sc, &cfg, Strategy::Energy).unwrap();
        assert_eq!(res.status, OptimizationStatus::Converged);
        stars.push(res.lambda_star);
    }
    for s in &stars {
        assert!((s - stars[0]).abs() <= 1e-3);
    }
}

#[test]
fn sweep_builds_exact_two_point_grid() {
    let p = paper_params();
    let res = sweep(&p, 1.0, 2.0, 2, Strategy::Energy, &default_cfg()).unwrap();
    assert_eq!(res.rows.len(), 2);
    assert_eq!(res.rows[0].lambda, 1.0);
    assert_eq!(res.rows[1].lambda, 2.0);
    assert_eq!(res.spacing, 1.0);
}

#[test]
fn sweep_x_max_is_non_increasing_on_reference_grid() {
    let p = paper_params();
    let res = sweep(&p, 1.0, 2.0, 1001, Strategy::Energy, &default_cfg()).unwrap();
    assert_eq!(res.rows.len(), 1001);
    assert_close(res.rows[0].x_max, X_MAX_REFERENCE, 0.0, 1e-10, "first row");
    let interior = |x: f64| x > 0.0 && x < p.x_m - 1e-5;
    for w in res.rows.windows(2) {
        assert!(
            w[1].x_max <= w[0].x_max,
            "x_max increased between λ = {} and λ = {}",
            w[0].lambda,
            w[1].lambda
        );
        if interior(w[0].x_max) && interior(w[1].x_max) {
            assert!(w[1].x_max < w[0].x_max, "interior rows must decrease strictly");
        }
        assert!(w[1].lambda > w[0].lambda);
        assert_eq!(w[1].j_value, (w[1].x_max - p.x_s).abs());
    }
    // Past the no-motion threshold every row is exactly zero.
    let zeros = res.rows.iter().filter(|r| r.x_max == 0.0).count();
    assert!(zeros > 0, "grid should cross the no-motion threshold");
}

#[test]
fn sweep_argmin_brackets_search_result() {
    let p = paper_params();
    let cfg = default_cfg();
    let res = sweep(&p, 0.5, 1.5, 1001, Strategy::Energy, &cfg).unwrap();
    let best = res.argmin();
    let opt = optimize_bore_scale(&p, &SearchConfig::default(), &cfg, Strategy::Energy).unwrap();
    assert!(
        (best.lambda - opt.lambda_star).abs() <= res.spacing,
        "argmin {} vs λ* {} exceeds one grid spacing {}",
        best.lambda,
        opt.lambda_star,
        res.spacing
    );
}

#[test]
fn calibrate_short_circuits_on_matching_boundary() {
    let p = paper_params();
    let res = calibrate_xm(
        &p,
        &SearchConfig::default(),
        &default_cfg(),
        LAMBDA_STAR_DESK,
        0.05,
        0.5,
    )
    .unwrap();
    assert_eq!(res.status, CalibrationStatus::Attained);
    assert_eq!(res.x_m, 0.05);
    assert!(res.residual.abs() <= 1e-3);
}

#[test]
fn calibrate_finds_attainable_target() {
    let p = paper_params();
    let sc = SearchConfig::default();
    let cfg = default_cfg();
    let target = 1.2;
    let res = calibrate_xm(&p, &sc, &cfg, target, 0.025, 1.0).unwrap();
    assert_eq!(res.status, CalibrationStatus::Attained);
    assert!(res.residual.abs() <= 1e-3);

    // The identified geometry indeed yields λ* = target.
    let pm = linstroke::model::EngineParams {
        x_m: res.x_m,
        ..p
    };
    let verify = optimize_bore_scale(&pm, &sc, &cfg, Strategy::Energy).unwrap();
    assert_close(verify.lambda_star, target, 0.0, 2e-3, "λ*(calibrated x_m)");

    // The scan brackets the bisection result.
    let scan = &res.scan;
    assert_eq!(scan.len(), 50);
    let pair = scan
        .windows(2)
        .find(|w| (w[0].1 - target) * (w[1].1 - target) <= 0.0)
        .expect("scan must bracket an attainable target");
    assert!(res.x_m >= pair[0].0 && res.x_m <= pair[1].0);
}

#[test]
fn calibrate_reports_unattainable_reference_target() {
    // λ*(x_m) on [0.025, 1.0] rises from ≈0.409 to ≈1.338 and never reaches
    // 1.461 (its x_m → ∞ limit is √(p1_left/p1_right) ≈ 1.369).
    let p = paper_params();
    let res = calibrate_xm(
        &p,
        &SearchConfig::default(),
        &default_cfg(),
        PAPER_TARGET,
        0.025,
        1.0,
    )
    .unwrap();
    assert_eq!(res.status, CalibrationStatus::NotAttainable);
    assert_eq!(res.x_m, 1.0, "closest λ* sits at the upper x_m bound");
    assert_close(res.lambda_star, LAMBDA_STAR_XM1, 0.0, 2e-3, "closest λ*");
    assert_close(
        res.residual,
        LAMBDA_STAR_XM1 - PAPER_TARGET,
        0.0,
        2e-3,
        "residual",
    );
    // The λ*(x_m) scan is monotone increasing, so the best really is the edge.
    for w in res.scan.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
}

#[test]
fn calibrate_validates_range() {
    let p = paper_params();
    let sc = SearchConfig::default();
    let cfg = default_cfg();
    assert!(calibrate_xm(&p, &sc, &cfg, 1.2, p.x_s, 1.0).is_err());
    assert!(calibrate_xm(&p, &sc, &cfg, 1.2, 0.5, 0.4).is_err());
    assert!(calibrate_xm(&p, &sc, &cfg, -1.0, 0.025, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_ratio_lies_in_unit_interval(
        s in 1e-6f64..10.0,
        x_s in 0.01f64..0.05,
        below in 0.0f64..0.0099,
        above in 0.0001f64..0.05,
    ) {
        // x_s strictly between the two responses.
        let x_prev = x_s - below - 1e-4;
        let x_next = x_s + above;
        let (s_next, rule) = update_step(s, x_prev, x_next, x_s);
        prop_assert_eq!(rule, StepRule::Contracted);
        prop_assert!(s_next / s > 0.0 && s_next / s < 1.0);
    }

    #[test]
    fn direction_rule_matches_sign(x_max in 0.0f64..0.1, x_s in 1e-4f64..0.1) {
        let d = search_direction(x_max, x_s);
        if x_s <= x_max {
            prop_assert_eq!(d, 1);
        } else {
            prop_assert_eq!(d, -1);
        }
    }
}
