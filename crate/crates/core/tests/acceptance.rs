//! End-to-end acceptance checks, one line per criterion.

use std::time::Instant;

use solispec::certificate::{
    certify_lambda, certify_lambda_direct, control_operator, negative_control, scan_embedded,
    CertifyOptions, LambdaGrid, ScanReport, Verdict,
};
use solispec::ground_state::{solve_ground_state, GroundState, GroundStateParams};
use solispec::inversion::{fixed_point_residual, invert_l};
use solispec::jost::{decaying_solution, default_window, expand_in_modes, End, JostOptions};
use solispec::nonlinearity::Nonlinearity;
use solispec::operator::{GridField2, LSign, LinearizedOperator, Stencil};

type Outcome = (bool, String);

fn cubic(h: f64) -> (GroundState, Nonlinearity) {
    let nl = Nonlinearity::cubic();
    let gs = solve_ground_state(&nl, &GroundStateParams::new(1.0).with_grid(30.0, h)).unwrap();
    (gs, nl)
}

fn families() -> Vec<(&'static str, Nonlinearity)> {
    vec![
        ("cubic", Nonlinearity::cubic()),
        ("saturable(0.5)", Nonlinearity::saturable(0.5).unwrap()),
        (
            "cubic-quintic(0.1)",
            Nonlinearity::cubic_quintic(0.1).unwrap(),
        ),
    ]
}

fn operator(nl: &Nonlinearity) -> LinearizedOperator {
    let gs = solve_ground_state(nl, &GroundStateParams::new(1.0)).unwrap();
    LinearizedOperator::from_ground_state(&gs, nl).unwrap()
}

fn ground_state_oracle() -> Outcome {
    let (gs, _) = cubic(1e-3);
    let g = gs.grid;
    let err = (g.ceil_index(-20.0)..=g.floor_index(20.0)).fold(0.0f64, |m, i| {
        m.max((gs.q[i] - 2f64.sqrt() / g.x(i).cosh()).abs())
    });
    let fit = gs.far_field_fit((8.0, 14.0)).unwrap();
    let c0 = 2.0 * 2f64.sqrt();
    let ok = err <= 1e-8 && (fit.rate - 1.0).abs() <= 1e-4 && (fit.amplitude - c0).abs() <= 1e-3;
    (
        ok,
        format!(
            "sup|Q - sqrt2 sech| = {err:.2e}, rate = {:.8}, c0 = {:.6}",
            fit.rate, fit.amplitude
        ),
    )
}

fn first_integral() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    let mut all = families();
    all.push(("power(2)", Nonlinearity::power(2.0).unwrap()));
    for (name, nl) in all {
        let r = solve_ground_state(&nl, &GroundStateParams::new(1.0))
            .and_then(|gs| gs.first_integral_residual(&nl));
        match r {
            Ok(r) => {
                ok &= r <= 1e-8;
                parts.push(format!("{name} {r:.1e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn kernel_residuals(h: f64) -> (f64, f64, f64) {
    let (gs, nl) = cubic(h);
    let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
    let neg: Vec<f64> = gs.q.iter().map(|v| -v).collect();
    let w1 = GridField2::new(gs.q.clone(), neg);
    let w2 = GridField2::new(gs.qp.clone(), gs.qp.clone());
    let r1 = op.apply_h(&w1).unwrap().norm() / w1.norm();
    let r2 = op.apply_h(&w2).unwrap().norm() / w2.norm();
    (r1, r2, op.scale())
}

fn kernel_identities() -> Outcome {
    let h = 1e-3;
    let (r1, r2, scale) = kernel_residuals(h);
    let (s1, s2, _) = kernel_residuals(h / 2.0);
    let bound = 5.0 * h * h * scale;
    let (q1, q2) = (r1 / s1, r2 / s2);
    let ok = r1 <= bound && r2 <= bound && (q1 - 4.0).abs() <= 0.4 && (q2 - 4.0).abs() <= 0.4;
    (
        ok,
        format!(
            "residuals {r1:.2e}, {r2:.2e} (bound {bound:.2e}); ratios under h/2: {q1:.3}, {q2:.3}"
        ),
    )
}

fn reflection() -> Outcome {
    let (gs, nl) = cubic(1e-2);
    let n = gs.grid.len();
    let w = GridField2::new(
        (0..n).map(|i| (i as f64 * 0.013).sin()).collect(),
        (0..n).map(|i| (i as f64 * 0.007).cos() * 1e-3).collect(),
    );
    let mut exact = true;
    for stencil in [Stencil::Second, Stencil::Fourth] {
        let op = LinearizedOperator::from_ground_state(&gs, &nl)
            .unwrap()
            .with_stencil(stencil);
        let lhs = op.apply_h(&w.swapped()).unwrap();
        let hw = op.apply_h(&w).unwrap();
        exact &= lhs.f.iter().zip(&hw.g).all(|(a, b)| *a == -*b)
            && lhs.g.iter().zip(&hw.f).all(|(a, b)| *a == -*b);
    }
    let op = operator(&Nonlinearity::cubic());
    let opts = CertifyOptions::default();
    let mut worst = 0.0f64;
    for lambda in [-1.5, -2.0, -5.0, -10.0] {
        let a = certify_lambda(&op, lambda, &opts).unwrap();
        let b = certify_lambda_direct(&op, lambda, &opts).unwrap();
        for (x, y) in [
            (a.v0 / a.v_scale, b.v0 / b.v_scale),
            (a.v0p / a.v_scale, b.v0p / b.v_scale),
            (a.parity_min, b.parity_min),
            (a.mismatch, b.mismatch),
        ] {
            worst = worst.max((x - y).abs() / x.abs().max(1.0));
        }
        exact &= a.verdict == b.verdict && a.u_positive == b.u_positive && a.v_signed == b.v_signed;
    }
    (
        exact && worst <= 1e-8,
        format!("S H S = -H bitwise for both stencils: {exact}; reflected vs direct records differ by {worst:.1e}"),
    )
}

fn round_trip() -> Outcome {
    let (gs, nl) = cubic(1e-3);
    let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
    let g = gs.grid;
    let w: Vec<f64> = g.xs().iter().map(|x| (-2.0 * x).exp()).collect();
    let mut errs = vec![];
    for sign in [LSign::Minus, LSign::Plus] {
        let lw = op.apply_l(sign, &w).unwrap();
        let back = invert_l(sign, &gs, &lw, 1.0).unwrap();
        let e = (g.ceil_index(1.0)..=g.floor_index(g.r() - 5.0))
            .fold(0.0f64, |m, i| m.max((back.at(i) - w[i]).abs()));
        errs.push(e);
    }
    (
        errs.iter().all(|e| *e <= 1e-6),
        format!("L- {:.2e}, L+ {:.2e} on [1, R-5]", errs[0], errs[1]),
    )
}

fn fixed_point() -> Outcome {
    let (gs, nl) = cubic(1e-3);
    let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
    let mut ok = true;
    let mut parts = vec![];
    for lambda in [1.5, 2.0, 5.0] {
        let sol = decaying_solution(&op, lambda, &JostOptions::default()).unwrap();
        let u: Vec<f64> = sol.f.iter().zip(&sol.g).map(|(f, g)| f + g).collect();
        let v: Vec<f64> = sol.f.iter().zip(&sol.g).map(|(f, g)| f - g).collect();
        let (ru, rv) = fixed_point_residual(&gs, &u, &v, lambda, 1.0, 20.0).unwrap();
        ok &= ru <= 1e-6 && rv <= 1e-6;
        parts.push(format!("lambda {lambda}: r_u {ru:.1e}, r_v {rv:.1e}"));
    }
    (ok, parts.join("; "))
}

fn scans() -> Vec<(&'static str, LinearizedOperator, ScanReport)> {
    let grid = LambdaGrid::new(1.0, 10.0, 200);
    families()
        .into_iter()
        .map(|(name, nl)| {
            let op = operator(&nl);
            let rep = scan_embedded(&op, &grid, &CertifyOptions::default()).unwrap();
            (name, op, rep)
        })
        .collect()
}

fn theorem_scan(runs: &[(&'static str, LinearizedOperator, ScanReport)], secs: f64) -> Outcome {
    let mut ok = secs <= 300.0;
    let mut parts = vec![];
    for (name, _, rep) in runs {
        let good = rep.records.iter().all(|r| {
            r.verdict == Verdict::NoEmbeddedEigenvalue
                && r.u_positive
                && r.v_signed
                && r.v0 > 0.0
                && r.v0p < 0.0
                && r.parity_min >= 1e-3
                && r.mismatch >= 1e-3
        });
        ok &= good;
        parts.push(format!(
            "{name}: {}/{} certified, min parity {:.3e}, min mismatch {:.3e}",
            rep.summary.no_embedded,
            rep.summary.count,
            rep.summary.min_parity,
            rep.summary.min_mismatch
        ));
    }
    parts.push(format!("{secs:.1} s"));
    (ok, parts.join("; "))
}

fn control() -> Outcome {
    let opts = CertifyOptions::default();
    let op = control_operator(1.0, 6.0, None, None).unwrap();
    let rep = negative_control(1.0, 6.0, 0.05, &op, &opts).unwrap();
    let hit = rep.detected.len() == 1
        && (rep.detected[0] - 3.0).abs() <= 0.05
        && rep.records[0].verdict == Verdict::EmbeddedCandidate;
    let shallow = control_operator(1.0, 0.1, None, None).unwrap();
    let scan = scan_embedded(&shallow, &LambdaGrid::new(1.0, 10.0, 200), &opts).unwrap();
    let none = scan.summary.embedded_candidates == 0
        && scan
            .records
            .windows(2)
            .all(|w| w[0].c_grow.signum() == w[1].c_grow.signum());
    (
        hit && none,
        format!(
            "depth 6: detected {:?} (predicted {:?}); depth 0.1: {} candidates, min mismatch {:.3}",
            rep.detected,
            rep.predicted,
            scan.summary.embedded_candidates,
            scan.summary.min_mismatch
        ),
    )
}

fn window_stability(runs: &[(&'static str, LinearizedOperator, ScanReport)]) -> Outcome {
    use rayon::prelude::*;
    let jopts = JostOptions::default();
    let mut ok = true;
    let mut parts = vec![];
    for (name, op, rep) in runs {
        let worst = rep
            .records
            .par_iter()
            .map(|r| {
                let sol = decaying_solution(op, r.lambda, &jopts).unwrap();
                let win = default_window(op, r.lambda, End::MinusInfinity, -5.0, jopts.negligible)
                    .unwrap();
                let a = expand_in_modes(&sol, op, End::MinusInfinity, win).unwrap();
                let b = expand_in_modes(&sol, op, End::MinusInfinity, win.enlarged(1.2)).unwrap();
                (0..4)
                    .map(|j| {
                        let se = a.standard_errors[j].max(b.standard_errors[j]);
                        (a.coefficients[j] - b.coefficients[j]).abs() / (10.0 * se)
                    })
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        ok &= worst <= 1.0;
        parts.push(format!("{name}: max |dc|/(10 se) = {worst:.3}"));
    }
    (ok, parts.join("; "))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, (ok, detail): Outcome| {
        println!(
            "criterion {n:>2} [{}] {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        failed += usize::from(!ok);
    };
    report(1, "ground-state oracle", ground_state_oracle());
    report(2, "first integral", first_integral());
    report(3, "kernel identities", kernel_identities());
    report(4, "structural reflection", reflection());
    report(5, "inversion round trip", round_trip());
    report(6, "fixed-point identities", fixed_point());
    let t = Instant::now();
    let runs = scans();
    let secs = t.elapsed().as_secs_f64();
    report(7, "essential-spectrum scan", theorem_scan(&runs, secs));
    report(8, "negative control", control());
    report(9, "mode-expansion stability", window_stability(&runs));
    let again = scans();
    let same = runs
        .iter()
        .zip(&again)
        .all(|(a, b)| serde_json::to_string(&a.2).unwrap() == serde_json::to_string(&b.2).unwrap());
    report(
        10,
        "determinism",
        (
            same,
            format!("repeated scans serialize bit-identically: {same}"),
        ),
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
