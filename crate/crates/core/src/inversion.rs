//! Half-line inversion of `L±` by reduction of order:
//! `u(x) = -P(x) ∫ₓ^∞ P(t)⁻² ∫ₜ^∞ P(s) v(s) ds dt` with `P = Q` for `L₋` and
//! `P = Q'` for `L₊`.

use crate::error::{Error, Result};
use crate::grid::{cumulative_from_right, Grid};
use crate::ground_state::GroundState;
use crate::operator::LSign;

/// A function sampled on `grid` from index `start` to the right end.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineFn {
    pub grid: Grid,
    pub start: usize,
    pub values: Vec<f64>,
}

impl HalfLineFn {
    pub fn x0(&self) -> f64 {
        self.grid.x(self.start)
    }

    /// Value at grid index `i >= start`.
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - self.start]
    }

    /// Full-grid samples, zero left of `start`.
    pub fn padded(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        out[self.start..].copy_from_slice(&self.values);
        out
    }
}

/// Decay rate of `v` on `[lo, R]` from a line fit through the logarithms of
/// the block maxima of `|v|` over four equal blocks. `None` if `v` vanishes
/// identically there.
pub fn envelope_rate(grid: &Grid, v: &[f64], lo: f64) -> Option<f64> {
    let (i0, i1) = (grid.ceil_index(lo), grid.len() - 1);
    let len = (i1 - i0 + 1) / 4;
    if len < 2 {
        return None;
    }
    let mut pts = Vec::with_capacity(4);
    for b in 0..4 {
        let (s, e) = (i0 + b * len, i0 + (b + 1) * len);
        let (mut m, mut at) = (0.0f64, s);
        for i in s..e {
            if v[i].abs() > m {
                m = v[i].abs();
                at = i;
            }
        }
        if m > 0.0 {
            pts.push((grid.x(at), m.ln()));
        }
    }
    match pts.len() {
        0 => None,
        // vanishes on the far blocks: decays faster than anything measurable
        1 => Some(f64::INFINITY),
        _ => {
            let n = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
            let (mx, my) = (sx / n, sy / n);
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            Some(-sxy / sxx)
        }
    }
}

/// `L±⁻¹ v` on `[x0, R]`, the solution of `L± u = v` that decays at `+∞`.
///
/// Both integrals run from the right end inward; their parts beyond `R` are
/// closed-form, with `P` continued by the ground state's fitted exponential
/// and `v` by its fitted envelope rate.
pub fn invert_l(sign: LSign, gs: &GroundState, v: &[f64], x0: f64) -> Result<HalfLineFn> {
    let grid = gs.grid;
    grid.check(v.len())?;
    let r = grid.r();
    if sign == LSign::Plus && x0 <= 0.0 {
        return Err(Error::Domain(format!(
            "L+ is inverted on half-lines x0 > 0 only (Q' vanishes at 0), got x0 = {x0}"
        )));
    }
    if !(x0 >= -r && x0 < r) {
        return Err(Error::Domain(format!("x0 = {x0} outside the grid")));
    }
    let start = grid.ceil_index(x0);
    let n = grid.len();
    if v[start..].iter().all(|&e| e == 0.0) {
        return Ok(HalfLineFn {
            grid,
            start,
            values: vec![0.0; n - start],
        });
    }
    let sqrt_mu = gs.mu.sqrt();
    let rate = envelope_rate(&grid, v, x0.max(0.5 * r)).unwrap_or(f64::INFINITY);
    if !(rate > sqrt_mu) {
        return Err(Error::HypothesisViolation(format!(
            "v decays at rate {rate:.6} <= sqrt(mu) = {sqrt_mu:.6}"
        )));
    }
    let p: &[f64] = match sign {
        LSign::Minus => &gs.q[start..],
        LSign::Plus => &gs.qp[start..],
    };
    let rho = gs.rate;
    let h = grid.h;
    let last = n - 1 - start;

    let pv: Vec<f64> = p.iter().zip(&v[start..]).map(|(a, b)| a * b).collect();
    let mut inner = cumulative_from_right(&pv, h);
    let inner_tail = if rate.is_finite() {
        pv[last] / (rho + rate)
    } else {
        0.0
    };
    inner.iter_mut().for_each(|e| *e += inner_tail);

    let integrand: Vec<f64> = inner.iter().zip(p).map(|(i, q)| i / (q * q)).collect();
    if integrand.iter().any(|e| !e.is_finite()) {
        return Err(Error::Domain(format!(
            "1/P² is singular on [{x0}, R]; move x0 away from zeros of P"
        )));
    }
    let mut outer = cumulative_from_right(&integrand, h);
    let outer_tail = if rate.is_finite() {
        integrand[last] / (rate - rho)
    } else {
        0.0
    };
    outer.iter_mut().for_each(|e| *e += outer_tail);

    let values = outer.iter().zip(p).map(|(o, q)| -q * o).collect();
    Ok(HalfLineFn {
        grid,
        start,
        values,
    })
}

/// Relative sup residuals `(r_u, r_v)` of `u = -λ L₊⁻¹ v` and `v = -λ L₋⁻¹ u`
/// on `[x0, x1]`, each normalized by the sup of the left-hand side there.
///
/// For `w = (f, g)` with `ℋw = λw`, the sum and difference of the two rows give
/// `L₋v = -λu` and `L₊u = -λv` with `u = f + g`, `v = f - g`.
pub fn fixed_point_residual(
    gs: &GroundState,
    u: &[f64],
    v: &[f64],
    lambda: f64,
    x0: f64,
    x1: f64,
) -> Result<(f64, f64)> {
    let grid = gs.grid;
    let iu = invert_l(LSign::Plus, gs, v, x0)?;
    let iv = invert_l(LSign::Minus, gs, u, x0)?;
    let end = grid.floor_index(x1);
    let rel = |lhs: &[f64], inv: &HalfLineFn| {
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for i in inv.start..=end {
            num = num.max((lhs[i] + lambda * inv.at(i)).abs());
            den = den.max(lhs[i].abs());
        }
        if den > 0.0 {
            num / den
        } else {
            num
        }
    };
    Ok((rel(u, &iu), rel(v, &iv)))
}
