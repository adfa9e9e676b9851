//! Browser bindings: ground profile, the Jost solution at one energy, and the
//! certificate curves over an energy range.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use solispec::certificate::{scan_embedded, CertifyOptions, LambdaGrid, Verdict};
use solispec::ground_state::{solve_ground_state, GroundState, GroundStateParams};
use solispec::jost::{decaying_solution, JostOptions};
use solispec::nonlinearity::Nonlinearity;
use solispec::operator::LinearizedOperator;

/// Half-width of the demo grid in units of `1/√μ`.
const R: f64 = 30.0;
/// Demo grid spacing in units of `1/√μ`.
const H: f64 = 1e-2;
/// Largest number of samples handed to the page per curve.
const PLOT_POINTS: usize = 1500;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn nonlinearity(family: &str, param: f64) -> Result<Nonlinearity, JsError> {
    match family {
        "cubic" => Ok(Nonlinearity::cubic()),
        "power" => Nonlinearity::power(param).map_err(err),
        "saturable" => Nonlinearity::saturable(param).map_err(err),
        "cubic_quintic" => Nonlinearity::cubic_quintic(param).map_err(err),
        other => Err(JsError::new(&format!("unknown family {other}"))),
    }
}

fn ground(family: &str, param: f64, mu: f64) -> Result<(GroundState, Nonlinearity), JsError> {
    if !(mu > 0.0) {
        return Err(JsError::new("mu must be positive"));
    }
    let nl = nonlinearity(family, param)?;
    let s = mu.sqrt();
    let gs = solve_ground_state(&nl, &GroundStateParams::new(mu).with_grid(R / s, H / s))
        .map_err(err)?;
    Ok((gs, nl))
}

fn stride(n: usize) -> usize {
    n.div_ceil(PLOT_POINTS).max(1)
}

/// Sampled curves sharing one abscissa.
#[wasm_bindgen]
pub struct Curves {
    x: Vec<f64>,
    y: Vec<Vec<f64>>,
    info: String,
}

#[wasm_bindgen]
impl Curves {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn count(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self, k: usize) -> Vec<f64> {
        self.y.get(k).cloned().unwrap_or_default()
    }

    /// One-line summary for display.
    pub fn info(&self) -> String {
        self.info.clone()
    }
}

/// `Q` and `Q'` on `[-R, R]`.
#[wasm_bindgen]
pub fn ground_profile(family: &str, param: f64, mu: f64) -> Result<Curves, JsError> {
    let (gs, _) = ground(family, param, mu)?;
    let st = stride(gs.grid.len());
    let idx: Vec<usize> = (0..gs.grid.len()).step_by(st).collect();
    Ok(Curves {
        x: idx.iter().map(|&i| gs.grid.x(i)).collect(),
        y: vec![
            idx.iter().map(|&i| gs.q[i]).collect(),
            idx.iter().map(|&i| gs.qp[i]).collect(),
        ],
        info: format!(
            "Q(0) = {:.8}, decay rate {:.6}, c0 = {:.6}",
            gs.shoot_value, gs.rate, gs.c0
        ),
    })
}

/// `u = f + g` and `v = f - g` of the solution decaying at `+∞` on
/// `|x| <= 10/√μ`, scaled by `sup max(|u|, |v|)` over `[0, 5/√μ]` as in the
/// certificate records.
#[wasm_bindgen]
pub fn jost_solution(family: &str, param: f64, mu: f64, lambda: f64) -> Result<Curves, JsError> {
    let (gs, nl) = ground(family, param, mu)?;
    let op = LinearizedOperator::from_ground_state(&gs, &nl).map_err(err)?;
    let sol = decaying_solution(&op, lambda, &JostOptions::default()).map_err(err)?;
    let g = sol.grid;
    let s = mu.sqrt();
    let u = |i: usize| sol.f[i] + sol.g[i];
    let v = |i: usize| sol.f[i] - sol.g[i];
    let c = g.center();
    let scale = (c..=g.floor_index(5.0 / s)).fold(0.0f64, |m, i| m.max(u(i).abs()).max(v(i).abs()));
    let (lo, hi) = (g.ceil_index(-10.0 / s), g.floor_index(10.0 / s));
    let idx: Vec<usize> = (lo..=hi).step_by(stride(hi - lo + 1)).collect();
    Ok(Curves {
        x: idx.iter().map(|&i| g.x(i)).collect(),
        y: vec![
            idx.iter().map(|&i| u(i) / scale).collect(),
            idx.iter().map(|&i| v(i) / scale).collect(),
        ],
        info: format!(
            "v(0) = {:.4e}, v'(0) = {:.4e} (scaled)",
            v(c) / scale,
            (sol.fp[c] - sol.gp[c]) / scale
        ),
    })
}

/// Normalized mismatch and parity margin against `λ`; `info` counts verdicts.
#[wasm_bindgen]
pub fn certificate_scan(
    family: &str,
    param: f64,
    mu: f64,
    lmin: f64,
    lmax: f64,
    n: usize,
) -> Result<Curves, JsError> {
    let (gs, nl) = ground(family, param, mu)?;
    let op = LinearizedOperator::from_ground_state(&gs, &nl).map_err(err)?;
    let rep = scan_embedded(
        &op,
        &LambdaGrid::new(lmin, lmax, n),
        &CertifyOptions::default(),
    )
    .map_err(err)?;
    let s = &rep.summary;
    let certified = rep
        .records
        .iter()
        .filter(|r| r.verdict == Verdict::NoEmbeddedEigenvalue)
        .count();
    Ok(Curves {
        x: rep.records.iter().map(|r| r.lambda).collect(),
        y: vec![
            rep.records.iter().map(|r| r.mismatch).collect(),
            rep.records.iter().map(|r| r.parity_min).collect(),
        ],
        info: format!(
            "{certified}/{} certified, {} inconclusive, {} candidates; min parity {:.3e}, min mismatch {:.3e}",
            s.count, s.inconclusive, s.embedded_candidates, s.min_parity, s.min_mismatch
        ),
    })
}
