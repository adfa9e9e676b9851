use std::sync::OnceLock;

use proptest::prelude::*;
use solispec::certificate::{
    certify_lambda, certify_solution, reflect_record, verdict, CertifyOptions, LambdaGrid,
    Thresholds, Verdict,
};
use solispec::ground_state::{solve_ground_state, GroundStateParams};
use solispec::jost::{decaying_solution, wronskian, JostOptions};
use solispec::nonlinearity::Nonlinearity;
use solispec::operator::{GridField2, LinearizedOperator, PotentialMatrix, Stencil};

fn cubic_op() -> &'static LinearizedOperator {
    static CELL: OnceLock<LinearizedOperator> = OnceLock::new();
    CELL.get_or_init(|| {
        let nl = Nonlinearity::cubic();
        let gs = solve_ground_state(&nl, &GroundStateParams::new(1.0)).unwrap();
        LinearizedOperator::from_ground_state(&gs, &nl).unwrap()
    })
}

fn coarse_cubic_op() -> &'static LinearizedOperator {
    static CELL: OnceLock<LinearizedOperator> = OnceLock::new();
    CELL.get_or_init(|| {
        let nl = Nonlinearity::cubic();
        let gs =
            solve_ground_state(&nl, &GroundStateParams::new(1.0).with_grid(25.0, 1e-2)).unwrap();
        LinearizedOperator::from_ground_state(&gs, &nl).unwrap()
    })
}

#[test]
fn potential_decays_at_twice_the_ground_state_rate() {
    for nl in [
        Nonlinearity::cubic(),
        Nonlinearity::saturable(0.5).unwrap(),
        Nonlinearity::cubic_quintic(0.1).unwrap(),
        Nonlinearity::power(2.0).unwrap(),
    ] {
        for mu in [0.5, 1.0, 1.5] {
            let gs = solve_ground_state(&nl, &GroundStateParams::new(mu)).unwrap();
            let v = PotentialMatrix::from_ground_state(&gs, &nl).unwrap();
            let g = gs.grid;
            let x5 = 5.0 / mu.sqrt();
            let i5 = g.ceil_index(x5);
            let c = (v.a[i5].abs().max(v.b[i5].abs())) * (2.0 * mu.sqrt() * x5).exp();
            for i in i5..g.len() {
                let x = g.x(i);
                let m = v.a[i].abs().max(v.b[i].abs());
                assert!(
                    m <= 1.5 * c * (-2.0 * mu.sqrt() * x).exp() + 1e-300,
                    "{:?} mu {mu} x {x}",
                    nl.family()
                );
                let j = g.len() - 1 - i;
                assert_eq!((v.a[j], v.b[j]), (v.a[i], v.b[i]));
            }
        }
    }
}

#[test]
fn ground_states_are_even_positive_and_decreasing() {
    for nl in [Nonlinearity::cubic(), Nonlinearity::saturable(0.5).unwrap()] {
        for mu in [0.25, 1.0, 1.9] {
            let gs = solve_ground_state(&nl, &GroundStateParams::new(mu)).unwrap();
            gs.check_hypotheses().unwrap();
            let (n, c) = (gs.grid.len(), gs.grid.center());
            for i in 0..n {
                assert_eq!(gs.q[i], gs.q[n - 1 - i]);
                assert!(gs.q[i] > 0.0);
            }
            assert!(gs.q[c..].windows(2).all(|w| w[1] < w[0]));
        }
    }
}

#[test]
fn scan_records_follow_grid_order() {
    let op = coarse_cubic_op();
    let grid = LambdaGrid::new(1.0, 10.0, 24);
    let rep = solispec::scan_embedded(op, &grid, &CertifyOptions::default()).unwrap();
    assert_eq!(rep.records.len(), 24);
    assert!(rep.records.windows(2).all(|w| w[0].lambda < w[1].lambda));
    assert!(rep.summary.mismatch_jumps.is_empty(), "{:?}", rep.summary);
    let mirrored = solispec::scan_embedded(
        op,
        &LambdaGrid::new(-10.0, -1.0, 24),
        &CertifyOptions::default(),
    )
    .unwrap();
    for (a, b) in rep.records.iter().zip(mirrored.records.iter().rev()) {
        // the two grids agree only up to rounding of the grid points
        assert!((a.lambda + b.lambda).abs() <= 1e-14 * a.lambda);
        assert!((a.mismatch - b.mismatch).abs() <= 1e-12 * a.mismatch);
        assert!((a.v0 + b.v0).abs() <= 1e-12 * a.v0.abs());
        assert_eq!(a.verdict, b.verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn swap_conjugation_negates_the_operator(seed in 0u64..1000, amp in 1e-6f64..1e3, fourth in any::<bool>()) {
        let stencil = if fourth { Stencil::Fourth } else { Stencil::Second };
        let op = coarse_cubic_op().clone().with_stencil(stencil);
        let n = op.grid().len();
        let s = seed as f64;
        let w = GridField2::new(
            (0..n).map(|i| ((i as f64 + s) * 0.017).sin()).collect(),
            (0..n).map(|i| amp * ((i as f64 * 0.003) - s).cos()).collect(),
        );
        let lhs = op.apply_h(&w.swapped()).unwrap();
        let hw = op.apply_h(&w).unwrap();
        for i in 0..n {
            prop_assert_eq!(lhs.f[i], -hw.g[i]);
            prop_assert_eq!(lhs.g[i], -hw.f[i]);
        }
    }

    #[test]
    fn verdict_requires_both_margins(p in 0.0f64..2e-3, m in 0.0f64..2e-3, at_threshold in any::<bool>()) {
        let th = Thresholds::default();
        let f = if at_threshold { th.threshold_factor } else { 1.0 };
        match verdict(p, m, &th, at_threshold) {
            Verdict::NoEmbeddedEigenvalue => prop_assert!(p >= th.cert * f && m >= th.mismatch * f),
            Verdict::EmbeddedCandidate => prop_assert!(m < th.mismatch * f),
            Verdict::Inconclusive => prop_assert!(p < th.cert * f && m >= th.mismatch * f),
        }
    }

    #[test]
    fn lambda_grids_increase(lo in 1.0f64..20.0, span in 1e-3f64..20.0, n in 2usize..500) {
        let g = LambdaGrid::new(lo, lo + span, n);
        prop_assert!(g.validate(1.0).is_ok());
        let p = g.points();
        prop_assert_eq!(p.len(), n);
        prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!((p[0], p[n - 1]), (lo, lo + span));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn certificates_hold_on_the_half_line(lambda in 1.0f64..10.0) {
        let rec = certify_lambda(cubic_op(), lambda, &CertifyOptions::default()).unwrap();
        prop_assert!(rec.u_positive && rec.v_signed);
        prop_assert!(rec.v0 > 0.0 && rec.v0p < 0.0);
        prop_assert_eq!(rec.verdict, Verdict::NoEmbeddedEigenvalue);
        let back = reflect_record(&reflect_record(&rec));
        prop_assert_eq!(back, rec.clone());
        let neg = certify_lambda(cubic_op(), -lambda, &CertifyOptions::default()).unwrap();
        prop_assert!(neg.u_positive && neg.v_signed && neg.v0 < 0.0 && neg.v0p > 0.0);
        prop_assert_eq!(neg.mismatch, rec.mismatch);
    }

    #[test]
    fn certificates_are_scale_invariant(lambda in 1.0f64..10.0, c in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6]) {
        let op = coarse_cubic_op();
        let opts = CertifyOptions::default();
        let sol = decaying_solution(op, lambda, &JostOptions::default()).unwrap();
        let base = certify_solution(&sol, op, &opts).unwrap();
        let mut s = sol.clone();
        for w in [&mut s.f, &mut s.g, &mut s.fp, &mut s.gp] {
            w.iter_mut().for_each(|e| *e *= c);
        }
        let r = certify_solution(&s, op, &opts).unwrap();
        prop_assert_eq!(r.verdict, base.verdict);
        prop_assert_eq!((r.u_positive, r.v_signed), (base.u_positive, base.v_signed));
        prop_assert!(r.v0 * r.v0p < 0.0);
        prop_assert!((r.mismatch - base.mismatch).abs() <= 1e-9 * base.mismatch);
        prop_assert!((r.parity_min - base.parity_min).abs() <= 1e-9 * base.parity_min);
    }

    #[test]
    fn wronskian_of_two_solutions_is_constant(lambda in 1.2f64..10.0, theta in 0.0f64..std::f64::consts::TAU) {
        let op = coarse_cubic_op();
        let jo = JostOptions::default();
        let w1 = decaying_solution(op, lambda, &jo).unwrap();
        let om = (lambda - 1.0).sqrt();
        let r = op.grid().r();
        let (c, s) = (theta.cos(), theta.sin());
        let y0 = [0.0, c * (om * r).cos() + s * (om * r).sin(), 0.0, om * (s * (om * r).cos() - c * (om * r).sin())];
        let w2 = solispec::jost::integrate_from_right(op, lambda, y0, jo.rtol).unwrap();
        let w = wronskian(&w1, &w2);
        let g = op.grid();
        // compare against the size of the individual products
        let (lo, hi) = (g.ceil_index(-5.0), g.len() - 1);
        let mut scale = 0.0f64;
        for i in lo..=hi {
            let a = w1.state(i);
            let b = w2.state(i);
            scale = scale.max((a[0] * b[2]).abs() + (a[1] * b[3]).abs() + (a[2] * b[0]).abs() + (a[3] * b[1]).abs());
        }
        for i in lo..=hi {
            prop_assert!((w[i] - w[hi]).abs() <= 1e-8 * scale, "x = {}", g.x(i));
        }
    }
}
