use super::*;
use crate::error::Error;
use crate::model::{optimal_offsets, MarketState, ModelParams};

fn params(a: f64) -> ModelParams<f64> {
    ModelParams::new(2.0, 0.1, a, 1.5, 1.0).unwrap()
}

fn grid(n_s: usize, n_t: usize) -> Grid<f64> {
    Grid::new(50.0, 150.0, n_s, n_t, -5, 5).unwrap()
}

#[test]
fn order_one_reproduces_identity() {
    let g = grid(20, 40);
    let (field, report) = solve_theta_k(&params(140.0), &g, ThetaOrder::One, LowerOrders::ClosedForm).unwrap();
    assert!(report.sup_error_vs_closed_form.unwrap() < 1e-10);
    for n in 0..=g.n_t {
        for i in 0..g.n_nodes() {
            assert!((field.value(n, i) - g.s_at(i)).abs() < 1e-10);
        }
    }
}

#[test]
fn order_zero_terminal_slice_is_zero() {
    let g = grid(10, 20);
    let (field, report) = solve_theta_k(&params(140.0), &g, ThetaOrder::Zero, LowerOrders::ClosedForm).unwrap();
    assert!(field.time_slice(g.n_t).iter().all(|v| *v == 0.0));
    assert!(report.sup_error_vs_closed_form.unwrap() < 1e-10);
    assert!((field.value(0, 5) - 175.0).abs() < 1e-10);
}

#[test]
fn order_two_matches_closed_form() {
    let g = grid(200, 200);
    for lower in [LowerOrders::ClosedForm, LowerOrders::Solved] {
        let (field, report) = solve_theta_k(&params(140.0), &g, ThetaOrder::Two, lower).unwrap();
        assert!(report.sup_error_vs_closed_form.unwrap() < 1e-8, "{lower:?}");
        assert!((field.interpolate(100.0, 0.0).unwrap() + 0.4).abs() < 1e-8);
    }
}

#[test]
fn cfl_and_size_gates() {
    let p = params(140.0);
    let coarse_time = grid(200, 10);
    match solve_theta_k(&p, &coarse_time, ThetaOrder::Zero, LowerOrders::ClosedForm) {
        Err(Error::CflViolation { required_n_t, ratio }) => {
            assert!(ratio > 0.5);
            assert!(grid(200, required_n_t).check_cfl(2.0, 1.0).is_ok());
            assert!(grid(200, required_n_t - 1).check_cfl(2.0, 1.0).is_err());
        }
        other => panic!("expected CFL violation, got {other:?}"),
    }
    assert!(matches!(solve_full_hjb(&p, &coarse_time, true), Err(Error::CflViolation { .. })));
    let narrow_q = Grid { q_min: -1, q_max: 1, ..grid(10, 400) };
    assert!(solve_full_hjb(&p, &narrow_q, true).is_ok());
    let too_narrow = Grid { q_min: 0, q_max: 1, ..grid(10, 20) };
    assert!(matches!(solve_full_hjb(&p, &too_narrow, true), Err(Error::GridTooSmall(_))));
}

#[test]
fn full_system_without_fills_is_frozen_model() {
    let p = params(0.0);
    let g = grid(40, 80);
    let (field, report) = solve_full_hjb(&p, &g, true).unwrap();
    assert!(report.sup_error_vs_closed_form.unwrap() < 1e-9);
    assert_eq!(report.notes.len(), 4);
    for q in g.q_min..=g.q_max {
        for i in 0..g.n_nodes() {
            assert_eq!(field.value(q, g.n_t, i), q as f64 * g.s_at(i));
        }
    }
}

#[test]
fn terminal_slice_exact_with_fills() {
    let g = grid(20, 400);
    let (field, report) = solve_full_hjb(&params(140.0), &g, true).unwrap();
    assert!(report.sup_error_vs_closed_form.is_none());
    for q in g.q_min..=g.q_max {
        for i in 0..g.n_nodes() {
            assert_eq!(field.value(q, g.n_t, i), q as f64 * g.s_at(i));
        }
    }
    assert!(field.max_abs().is_finite());
}

#[test]
fn fill_rate_limits_the_step() {
    let p = ModelParams::new(2.0, 0.1, 1e6, 1.5, 1.0).unwrap();
    let g = grid(10, 20);
    match solve_full_hjb(&p, &g, true) {
        Err(Error::StepTooLarge { required_n_t, ratio }) => {
            assert!(ratio > 1.0);
            assert_eq!(required_n_t, required_full_n_t(&p, &g));
        }
        other => panic!("expected a step-size error, got {other:?}"),
    }
    // diffusion alone would accept 33 steps on the default window; the fills need more
    let p = params(140.0);
    let g = grid(200, 33);
    assert!(g.check_cfl(2.0, 1.0).is_ok());
    let need = required_full_n_t(&p, &g);
    assert!(need > 33);
    assert!(matches!(solve_full_hjb(&p, &g, true), Err(Error::StepTooLarge { .. })));
    assert!(solve_full_hjb(&p, &grid(200, need), true).is_ok());
}

#[test]
fn unclamped_crossed_quotes_report_nonfinite() {
    // Far inventories give hugely negative raw offsets; without clamping exp(-kappa delta) overflows.
    let p = ModelParams::new(4.0, 2.0, 300.0, 5.0, 1.0).unwrap();
    let g = grid(10, 20);
    let g = grid(10, required_full_n_t(&p, &g));
    match solve_full_hjb(&p, &g, false) {
        Err(Error::NonfiniteField { step, .. }) => assert!(step >= 1),
        other => panic!("expected nonfinite field, got {other:?}"),
    }
}

#[test]
fn inventory_profile_is_smooth() {
    let p = params(140.0);
    let base = Grid { q_min: -10, q_max: 10, ..grid(200, 1) };
    let g = Grid { n_t: required_full_n_t(&p, &base), ..base };
    let (field, report) = solve_full_hjb(&p, &g, true).unwrap();
    assert_eq!(report.clamp_events, 0);
    for t in [0.0, 0.5, 0.99] {
        // inventory penalty theta(q) - theta(0) - q s: symmetric, concave, zero at q = 0
        let pen: Vec<f64> = (-10..=10)
            .map(|q| field.interpolate(100.0, q, t).unwrap() - field.interpolate(100.0, 0, t).unwrap() - 100.0 * q as f64)
            .collect();
        for k in 1..pen.len() - 1 {
            assert!(pen[k - 1] - 2.0 * pen[k] + pen[k + 1] < 0.0, "t {t}: {pen:?}");
            assert!((pen[k] - pen[pen.len() - 1 - k]).abs() < 1e-8);
        }
        let mut last = f64::NEG_INFINITY;
        for q in -9..=9 {
            let quote = extract_quotes(&field, 100.0, q, t).unwrap();
            assert!(quote.delta_b > last, "bid offset rises with inventory");
            last = quote.delta_b;
        }
    }
    // close to expiry the expansion is accurate
    for q in -3..=3 {
        let quote = extract_quotes(&field, 100.0, q, 0.99).unwrap();
        let exact = optimal_offsets(&p, &MarketState::new(100.0, 0.99, q, 0.0), false).unwrap();
        assert!((quote.delta_b - exact.delta_b).abs() < 1e-3, "q {q}");
    }
}

#[test]
fn frozen_field_quotes_match_closed_form() {
    let p = params(0.0);
    let g = grid(40, 80);
    let (field, _) = solve_full_hjb(&p, &g, false).unwrap();
    for (s, q, t) in [(100.0, 0, 0.0), (87.3, 2, 0.41), (120.0, -3, 0.9)] {
        let from_grid = extract_quotes(&field, s, q, t).unwrap();
        let exact = optimal_offsets(&p, &MarketState::new(s, t, q, 0.0), false).unwrap();
        assert!((from_grid.delta_a - exact.delta_a).abs() < 1e-9);
        assert!((from_grid.delta_b - exact.delta_b).abs() < 1e-9);
    }
}

#[test]
fn terminal_quotes_are_log_term() {
    let p = params(140.0);
    let g = grid(20, 400);
    let (field, _) = solve_full_hjb(&p, &g, true).unwrap();
    let quote = extract_quotes(&field, 100.0, 0, 1.0).unwrap();
    assert!((quote.delta_a - p.log_term()).abs() < 1e-12);
    assert!((quote.delta_b - p.log_term()).abs() < 1e-12);
}

#[test]
fn extracted_spread_is_discrete_curvature() {
    let p = params(140.0);
    let g = grid(20, 400);
    let (field, _) = solve_full_hjb(&p, &g, false).unwrap();
    let (s, t) = (100.0, 0.3);
    let quote = extract_quotes(&field, s, 1, t).unwrap();
    let th = |q| field.interpolate(s, q, t).unwrap();
    let expected = -(th(2) - 2.0 * th(1) + th(0)) + 2.0 * p.log_term();
    assert!((quote.spread() - expected).abs() < 1e-9);
}

#[test]
fn extraction_rejects_out_of_grid() {
    let p = params(0.0);
    let g = grid(10, 20);
    let (field, _) = solve_full_hjb(&p, &g, true).unwrap();
    assert!(matches!(extract_quotes(&field, 100.0, 5, 0.0), Err(Error::OutOfGrid { .. })));
    assert!(matches!(extract_quotes(&field, 151.0, 0, 0.0), Err(Error::OutOfGrid { .. })));
    assert!(matches!(extract_quotes(&field, 100.0, 0, 1.5), Err(Error::OutOfGrid { .. })));
}

#[test]
fn translation_covariance() {
    let p = params(140.0);
    let g = grid(20, 400);
    let c = 37.0;
    let (base, _) = solve_full_hjb(&p, &g, true).unwrap();
    let (moved, _) = solve_full_hjb(&p, &g.shifted(c), true).unwrap();
    let mut worst: f64 = 0.0;
    for q in g.q_min..=g.q_max {
        for n in 0..=g.n_t {
            for i in 0..g.n_nodes() {
                let d = moved.value(q, n, i) - q as f64 * c - base.value(q, n, i);
                worst = worst.max(d.abs());
            }
        }
    }
    assert!(worst < 1e-8, "translation gap {worst}");
}

#[test]
fn bid_ask_mirror_symmetry() {
    let p = params(140.0);
    // odd n_s puts a node at the window centre
    let g = grid(21, 400);
    let (field, _) = solve_full_hjb(&p, &g, true).unwrap();
    let s = 100.0;
    for t in [0.0, 0.5] {
        for q in 1..g.q_max {
            let (_, r_a) = field.reservation_sides(s, q, t).unwrap();
            let (r_b, _) = field.reservation_sides(s, -q, t).unwrap();
            assert!((r_a.unwrap() - (2.0 * s - r_b.unwrap())).abs() < 1e-8, "q = {q}, t = {t}");
        }
    }
}

#[test]
fn convergence_study_needs_two_levels() {
    assert!(matches!(
        convergence_study(&params(140.0), &grid(10, 20), 1),
        Err(Error::TooFewLevels(1))
    ));
}

#[test]
fn convergence_study_is_monotone() {
    let table = convergence_study(&params(140.0), &grid(25, 20), 3).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert_eq!(table.rows[2].n_s, 100);
    for c in Column::ALL {
        assert!(table.is_monotone(c), "{c:?}: {:?}", table.errors(c));
        assert!(table.first_order_or_exact(c));
    }
    assert!(table.rows.iter().all(|r| r.frozen_full < 1e-8));
}
