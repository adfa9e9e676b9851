//! Solutions of `(ℋ - λ)w = 0` for `λ` in the essential spectrum: asymptotic
//! modes, the solution decaying at `+∞`, and least-squares expansion of any
//! solution in the mode basis near either end.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d1_five_point, Grid};
use crate::ode;
use crate::operator::{LinearizedOperator, PotentialMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Decaying,
    Growing,
    Cos,
    Sin,
    Const,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    PlusInfinity,
    MinusInfinity,
}

impl End {
    fn sign(self) -> f64 {
        match self {
            End::PlusInfinity => 1.0,
            End::MinusInfinity => -1.0,
        }
    }
}

/// One of the four free solutions of `(ℋ₀ - λ)w = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticMode {
    pub kind: ModeKind,
    pub channel: Channel,
    /// Decay rate for exponential modes, frequency for oscillatory ones, zero
    /// for the threshold pair.
    pub rate: f64,
    pub lambda: f64,
}

/// The modes in the order decaying, growing, oscillatory (cos or const),
/// oscillatory (sin or linear).
pub fn asymptotic_modes(lambda: f64, mu: f64) -> Result<[AsymptoticMode; 4]> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if !(lambda.abs() >= mu) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} lies in the gap (-{mu}, {mu})"
        )));
    }
    let (exp_ch, osc_ch) = if lambda > 0.0 {
        (Channel::First, Channel::Second)
    } else {
        (Channel::Second, Channel::First)
    };
    let k = (mu + lambda.abs()).sqrt();
    let omega = (lambda.abs() - mu).sqrt();
    let mode = |kind, channel, rate| AsymptoticMode {
        kind,
        channel,
        rate,
        lambda,
    };
    let (third, fourth) = if omega == 0.0 {
        (ModeKind::Const, ModeKind::Linear)
    } else {
        (ModeKind::Cos, ModeKind::Sin)
    };
    Ok([
        mode(ModeKind::Decaying, exp_ch, k),
        mode(ModeKind::Growing, exp_ch, k),
        mode(third, osc_ch, omega),
        mode(fourth, osc_ch, omega),
    ])
}

impl AsymptoticMode {
    fn is_exponential(&self) -> bool {
        matches!(self.kind, ModeKind::Decaying | ModeKind::Growing)
    }

    /// Exponent `s` of `e^{s(x - x_ref)}` for exponential modes, with decaying
    /// meaning decaying towards `end`.
    fn exponent(&self, end: End) -> f64 {
        match self.kind {
            ModeKind::Decaying => -end.sign() * self.rate,
            ModeKind::Growing => end.sign() * self.rate,
            _ => 0.0,
        }
    }

    /// State `(f, g, f', g')` of the free mode, normalized to unit amplitude
    /// at `x_ref`.
    pub fn state(&self, x: f64, x_ref: f64, end: End) -> [f64; 4] {
        let t = x - x_ref;
        let (v, d) = match self.kind {
            ModeKind::Decaying | ModeKind::Growing => {
                let s = self.exponent(end);
                let e = (s * t).exp();
                (e, s * e)
            }
            ModeKind::Cos => ((self.rate * t).cos(), -self.rate * (self.rate * t).sin()),
            ModeKind::Sin => ((self.rate * t).sin(), self.rate * (self.rate * t).cos()),
            ModeKind::Const => (1.0, 0.0),
            ModeKind::Linear => (t, 1.0),
        };
        match self.channel {
            Channel::First => [v, 0.0, d, 0.0],
            Channel::Second => [0.0, v, 0.0, d],
        }
    }

    /// The free mode plus the first-order response to the exponentially small
    /// potential tail. Only exponential modes are corrected: the correction of
    /// the growing mode can outgrow the oscillatory modes when the mode rate
    /// exceeds the potential's decay rate.
    ///
    /// With forcing `h = e^φ`, the particular solution of `y'' - c y = h` is
    /// `h / (φ'² + φ'' - c)` up to terms in the third derivative of `φ`; the
    /// derivatives come from local differences of `log|a|` and `log|b|`.
    pub fn state_with_tail(
        &self,
        x: f64,
        x_ref: f64,
        end: End,
        mu: f64,
        pot: &PotentialMatrix,
    ) -> [f64; 4] {
        let mut y = self.state(x, x_ref, end);
        if pot.tail_rate.is_none() || !self.is_exponential() {
            return y;
        }
        let s = self.exponent(end);
        let f0 = (s * (x - x_ref)).exp();
        let omega2 = self.lambda.abs() - mu;
        let k2 = self.rate * self.rate;
        let (si, ci) = match self.channel {
            Channel::First => (0, 1),
            Channel::Second => (1, 0),
        };
        let [lo, mid, hi] = [x - TAIL_DELTA, x, x + TAIL_DELTA].map(|t| pot.eval(t));
        let mut add = |idx: usize, v: [f64; 3], c: f64| {
            if v.iter().any(|w| *w == 0.0 || !w.is_finite()) {
                return;
            }
            let l = v.map(|w| w.abs().ln());
            let d1 = (l[2] - l[0]) / (2.0 * TAIL_DELTA) + s;
            let d2 = (l[2] - 2.0 * l[1] + l[0]) / (TAIL_DELTA * TAIL_DELTA);
            let den = d1 * d1 + d2 - c;
            if den.abs() > 1e-8 {
                let corr = -v[1] * f0 / den;
                y[idx] += corr;
                y[idx + 2] += d1 * corr;
            }
        };
        // y'' = k² y - a y - b z in the exponential channel,
        // z'' = -ω² z - a z - b y in the oscillatory one
        add(si, [lo.0, mid.0, hi.0], k2);
        add(ci, [lo.1, mid.1, hi.1], -omega2);
        y
    }
}

/// Step for the local logarithmic derivatives of the potential tail.
const TAIL_DELTA: f64 = 1e-2;

/// A solution of `(ℋ - λ)w = 0` sampled on the operator's grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JostSolution {
    pub lambda: f64,
    pub mu: f64,
    pub grid: Grid,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub fp: Vec<f64>,
    pub gp: Vec<f64>,
    /// Mode the solution follows at `+∞`, if it was built from one.
    pub declared: Option<AsymptoticMode>,
    /// Abscissa where the declared mode has unit amplitude.
    pub x_asym: f64,
    /// Relative accuracy of the samples, added to fitted standard errors.
    pub rtol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JostOptions {
    pub rtol: f64,
    /// `max(|a|, |b|)` below which the potential counts as negligible.
    pub negligible: f64,
    /// Largest admissible `k (R + x_asym)`, the log of the growth across the grid.
    pub max_growth: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            negligible: 1e-14,
            max_growth: 600.0,
        }
    }
}

fn rhs(op: &LinearizedOperator, lambda: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    let mu = op.mu;
    move |x, y| {
        let (a, b) = op.potential.eval(x);
        [
            y[2],
            y[3],
            (mu + lambda - a) * y[0] - b * y[1],
            (mu - lambda - a) * y[1] - b * y[0],
        ]
    }
}

/// Integrates from the right end of the grid with state `y0` down to the left
/// end and samples at every grid point.
pub fn integrate_from_right(
    op: &LinearizedOperator,
    lambda: f64,
    y0: [f64; 4],
    rtol: f64,
) -> Result<JostSolution> {
    let grid = *op.grid();
    let n = grid.len();
    let points: Vec<f64> = (0..n).rev().map(|i| grid.x(i)).collect();
    let opts = ode::Options {
        rtol,
        atol: 1e-300,
        peak_relative: true,
        h_max: 0.5,
        ..ode::Options::default()
    };
    let ys = ode::sample(rhs(op, lambda), grid.r(), y0, &points, &opts)?;
    let mut sol = JostSolution {
        lambda,
        mu: op.mu,
        grid,
        f: vec![0.0; n],
        g: vec![0.0; n],
        fp: vec![0.0; n],
        gp: vec![0.0; n],
        declared: None,
        x_asym: grid.r(),
        rtol,
    };
    for (k, y) in ys.into_iter().enumerate() {
        let i = n - 1 - k;
        sol.f[i] = y[0];
        sol.g[i] = y[1];
        sol.fp[i] = y[2];
        sol.gp[i] = y[3];
    }
    Ok(sol)
}

/// The solution decaying at `+∞` like `e^{-k(x - x_asym)}` in the exponential
/// channel, `k = √(μ + |λ|)`, where `x_asym` is where the potential becomes
/// negligible.
///
/// Integration starts at the right wall `R` from the decaying mode plus its
/// first-order potential correction and runs leftward, the stable direction
/// for this mode, all the way to `-R`.
pub fn decaying_solution(
    op: &LinearizedOperator,
    lambda: f64,
    opts: &JostOptions,
) -> Result<JostSolution> {
    let mu = op.mu;
    let modes = asymptotic_modes(lambda, mu)?;
    let dec = modes[0];
    let grid = *op.grid();
    let r = grid.r();
    let x_asym = op.potential.negligible_from(opts.negligible);
    if x_asym >= r {
        return Err(Error::Domain(format!(
            "potential is not negligible (<= {:e}) anywhere inside the grid; enlarge R",
            opts.negligible
        )));
    }
    if dec.rate * (r + x_asym) > opts.max_growth {
        return Err(Error::InvalidParameters(format!(
            "lambda = {lambda}: growth e^{:.0} across the grid overflows",
            dec.rate * (r + x_asym)
        )));
    }
    let y0 = dec.state_with_tail(r, x_asym, End::PlusInfinity, mu, &op.potential);
    let mut sol = integrate_from_right(op, lambda, y0, opts.rtol)?;
    sol.declared = Some(dec);
    sol.x_asym = x_asym;
    Ok(sol)
}

impl JostSolution {
    pub fn state(&self, i: usize) -> [f64; 4] {
        [self.f[i], self.g[i], self.fp[i], self.gp[i]]
    }

    /// `S(f, g) = (g, f)` at `-λ`.
    pub fn reflected(&self) -> Self {
        let declared = self.declared.map(|m| AsymptoticMode {
            lambda: -m.lambda,
            channel: match m.channel {
                Channel::First => Channel::Second,
                Channel::Second => Channel::First,
            },
            ..m
        });
        Self {
            lambda: -self.lambda,
            f: self.g.clone(),
            g: self.f.clone(),
            fp: self.gp.clone(),
            gp: self.fp.clone(),
            declared,
            ..self.clone()
        }
    }

    /// `max_i |w''_i - M(x_i) w_i| / (|M| max|w|)_i` with `w''` from a five-point
    /// difference of the sampled derivatives.
    pub fn ode_residual(&self, op: &LinearizedOperator) -> f64 {
        let n = self.grid.len();
        let h = self.grid.h;
        let mu = self.mu;
        let lambda = self.lambda;
        let scale = mu + lambda.abs() + op.potential.sup();
        let mut worst: f64 = 0.0;
        for i in 2..n - 2 {
            let (a, b) = (op.potential.a[i], op.potential.b[i]);
            let fpp = d1_five_point(&self.fp, i, h);
            let gpp = d1_five_point(&self.gp, i, h);
            let rf = fpp - ((mu + lambda - a) * self.f[i] - b * self.g[i]);
            let rg = gpp - ((mu - lambda - a) * self.g[i] - b * self.f[i]);
            let mag = self.f[i]
                .abs()
                .max(self.g[i].abs())
                .max((self.fp[i].abs().max(self.gp[i].abs())) / scale.sqrt());
            if mag > 0.0 {
                worst = worst.max(rf.abs().max(rg.abs()) / (scale * mag));
            }
        }
        worst
    }

    /// `sup` of `max(|f|, |g|)` over `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        let (i0, i1) = (self.grid.ceil_index(lo), self.grid.floor_index(hi));
        (i0..=i1).fold(0.0, |m, i| m.max(self.f[i].abs()).max(self.g[i].abs()))
    }
}

/// `w₁ᵀw₂' - w₁'ᵀw₂`, constant in `x` because the coupling matrix is symmetric.
pub fn wronskian(w1: &JostSolution, w2: &JostSolution) -> Vec<f64> {
    (0..w1.f.len())
        .map(|i| w1.f[i] * w2.fp[i] + w1.g[i] * w2.gp[i] - w1.fp[i] * w2.f[i] - w1.gp[i] * w2.g[i])
        .collect()
}

/// Fit window for an expansion near one end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    /// Modes have unit amplitude here.
    pub x_ref: f64,
}

impl Window {
    /// The window lengthened by `factor`, away from the origin.
    pub fn enlarged(&self, factor: f64) -> Self {
        let len = (self.hi - self.lo) * factor;
        if self.lo >= 0.0 {
            Self {
                hi: self.lo + len,
                ..*self
            }
        } else {
            Self {
                lo: self.hi - len,
                ..*self
            }
        }
    }
}

/// Window starting where the potential becomes negligible, of length
/// `max(3 periods, 10/k)`, shortened if needed so that a 20% enlargement still
/// fits inside the grid.
pub fn default_window(
    op: &LinearizedOperator,
    lambda: f64,
    end: End,
    x_ref: f64,
    negligible: f64,
) -> Result<Window> {
    let modes = asymptotic_modes(lambda, op.mu)?;
    let (k, omega) = (modes[0].rate, modes[2].rate);
    let mut len = 10.0 / k;
    if omega > 0.0 {
        len = len.max(3.0 * std::f64::consts::TAU / omega);
    }
    let r = op.grid().r();
    let start = op.potential.negligible_from(negligible);
    let room = (r - 2.0 * op.grid().h - start) / 1.2;
    if room <= 0.0 {
        return Err(Error::Domain(
            "no potential-free room for the mode fit".into(),
        ));
    }
    let len = len.min(room);
    Ok(match end {
        End::PlusInfinity => Window {
            lo: start,
            hi: start + len,
            x_ref,
        },
        End::MinusInfinity => Window {
            lo: -start - len,
            hi: -start,
            x_ref,
        },
    })
}

/// Coefficients of a solution in the mode basis at one end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub end: End,
    pub window: Window,
    /// `(c_dec, c_grow, c_osc1, c_osc2)`.
    pub coefficients: [f64; 4],
    /// Standard error of each coefficient: the least-squares fit residual in
    /// coefficient units, combined with the samples' relative accuracy.
    pub standard_errors: [f64; 4],
    /// Relative least-squares residual.
    pub residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

/// Largest condition number accepted by `expand_in_modes`.
pub const MAX_CONDITION: f64 = 1e10;

/// Samples used per fit; the window is subsampled evenly to at most this many
/// grid points.
const FIT_POINTS: usize = 400;

/// Least-squares fit of `(f, g, f', g')` over the window against the four
/// modes (the exponential ones with their first-order potential tails).
///
/// The two channels can differ in size by many orders of magnitude, so the fit
/// is done in two blocks: the exponential channel against the two exponential
/// modes, then the oscillatory channel, after removing the exponential modes'
/// cross-channel tails, against the two oscillatory modes. Derivative rows are
/// scaled by the inverse mode rate.
pub fn expand_in_modes(
    sol: &JostSolution,
    op: &LinearizedOperator,
    end: End,
    window: Window,
) -> Result<Expansion> {
    let modes = asymptotic_modes(sol.lambda, sol.mu)?;
    let grid = &sol.grid;
    let (i0, i1) = (grid.ceil_index(window.lo), grid.floor_index(window.hi));
    if i1 < i0 + 8 {
        return Err(Error::Domain(format!(
            "window [{}, {}] holds too few samples",
            window.lo, window.hi
        )));
    }
    let stride = ((i1 - i0) / FIT_POINTS).max(1);
    let idx: Vec<usize> = (i0..=i1).step_by(stride).collect();
    let k = modes[0].rate;
    let omega = modes[2].rate.max(1.0 / (window.hi - window.lo));
    let (ec, oc) = match modes[0].channel {
        Channel::First => (0, 1),
        Channel::Second => (1, 0),
    };
    let states: Vec<[[f64; 4]; 4]> = idx
        .iter()
        .map(|&i| {
            let x = grid.x(i);
            std::array::from_fn(|c| {
                modes[c].state_with_tail(x, window.x_ref, end, sol.mu, &op.potential)
            })
        })
        .collect();

    let exp_data: Vec<[f64; 2]> = idx
        .iter()
        .map(|&i| {
            let d = sol.state(i);
            [d[ec], d[ec + 2] / k]
        })
        .collect();
    let exp_cols: Vec<[[f64; 2]; 2]> = states
        .iter()
        .map(|s| std::array::from_fn(|c| [s[c][ec], s[c][ec + 2] / k]))
        .collect();
    let (ce, se_e, re, ke) = block_fit(&exp_data, &exp_cols)?;

    let osc_data: Vec<[f64; 2]> = idx
        .iter()
        .zip(&states)
        .map(|(&i, s)| {
            let d = sol.state(i);
            let v = d[oc] - ce[0] * s[0][oc] - ce[1] * s[1][oc];
            let dv = d[oc + 2] - ce[0] * s[0][oc + 2] - ce[1] * s[1][oc + 2];
            [v, dv / omega]
        })
        .collect();
    let osc_cols: Vec<[[f64; 2]; 2]> = states
        .iter()
        .map(|s| std::array::from_fn(|c| [s[c + 2][oc], s[c + 2][oc + 2] / omega]))
        .collect();
    let (co, se_o, ro, ko) = block_fit(&osc_data, &osc_cols)?;

    let coefficients = [ce[0], ce[1], co[0], co[1]];
    let stat = [se_e[0], se_e[1], se_o[0], se_o[1]];
    Ok(Expansion {
        end,
        window,
        coefficients,
        standard_errors: std::array::from_fn(|j| stat[j].hypot(sol.rtol * coefficients[j])),
        residual: re.max(ro),
        condition: ke.max(ko),
    })
}

/// Two-column least squares with column scaling. Returns the coefficients,
/// their standard errors, the relative residual and the condition number.
fn block_fit(data: &[[f64; 2]], cols: &[[[f64; 2]; 2]]) -> Result<([f64; 2], [f64; 2], f64, f64)> {
    let m = 2 * data.len();
    let mut a = DMatrix::<f64>::zeros(m, 2);
    let mut y = DVector::<f64>::zeros(m);
    for (r, (d, c)) in data.iter().zip(cols).enumerate() {
        for row in 0..2 {
            y[2 * r + row] = d[row];
            for col in 0..2 {
                a[(2 * r + row, col)] = c[col][row];
            }
        }
    }
    let norms = [a.column(0).norm(), a.column(1).norm()];
    for (c, nrm) in norms.iter().enumerate() {
        if !(*nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        a.column_mut(c).scale_mut(1.0 / nrm);
    }
    let svd = a.clone().svd(true, true);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let z = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Integration(e.to_string()))?;
    let ynorm = y.norm();
    let rss = (&a * &z - &y).norm();
    let residual = if ynorm > 0.0 { rss / ynorm } else { 0.0 };
    let sigma = rss / ((m - 2) as f64).sqrt();
    let v_t = svd.v_t.as_ref().expect("requested");
    let se: [f64; 2] = std::array::from_fn(|j| {
        let var: f64 = (0..2)
            .map(|k| (v_t[(k, j)] / svd.singular_values[k]).powi(2))
            .sum();
        sigma * var.sqrt() / norms[j]
    });
    Ok(([z[0] / norms[0], z[1] / norms[1]], se, residual, condition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_state::{solve_ground_state, GroundStateParams};
    use crate::nonlinearity::Nonlinearity;

    fn cubic_op(h: f64) -> LinearizedOperator {
        let nl = Nonlinearity::cubic();
        let gs = solve_ground_state(&nl, &GroundStateParams::new(1.0).with_grid(30.0, h)).unwrap();
        LinearizedOperator::from_ground_state(&gs, &nl).unwrap()
    }

    #[test]
    fn modes_above_threshold() {
        let m = asymptotic_modes(5.0, 1.0).unwrap();
        assert_eq!(m[0].rate, 6f64.sqrt());
        assert_eq!(m[0].channel, Channel::First);
        assert_eq!(m[2].rate, 2.0);
        assert_eq!(m[2].channel, Channel::Second);
        assert_eq!((m[2].kind, m[3].kind), (ModeKind::Cos, ModeKind::Sin));
    }

    #[test]
    fn modes_at_threshold() {
        let m = asymptotic_modes(1.0, 1.0).unwrap();
        assert_eq!(m[0].rate, 2f64.sqrt());
        assert_eq!((m[2].kind, m[3].kind), (ModeKind::Const, ModeKind::Linear));
        let s = m[3].state(3.0, 1.0, End::PlusInfinity);
        assert_eq!(s, [0.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn modes_below_threshold_swap_channels() {
        let p = asymptotic_modes(5.0, 1.0).unwrap();
        let n = asymptotic_modes(-5.0, 1.0).unwrap();
        for (a, b) in p.iter().zip(&n) {
            assert_eq!(a.rate, b.rate);
            assert_eq!(a.kind, b.kind);
            assert_ne!(a.channel, b.channel);
        }
        assert!(matches!(asymptotic_modes(0.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn free_equation_gives_the_pure_mode() {
        let grid = Grid::symmetric(20.0, 0.01).unwrap();
        let op = LinearizedOperator::new(1.0, PotentialMatrix::zero(grid));
        let sol = decaying_solution(&op, 3.0, &JostOptions::default()).unwrap();
        assert_eq!(sol.x_asym, 0.0);
        for i in (0..grid.len()).step_by(97) {
            let x = grid.x(i);
            let exact = (-2.0 * x).exp();
            assert!((sol.f[i] - exact).abs() <= 1e-10 * exact, "{x}");
            assert!((sol.fp[i] + 2.0 * exact).abs() <= 1e-10 * exact, "{x}");
            assert_eq!(sol.g[i], 0.0);
        }
    }

    #[test]
    fn cubic_decaying_solution() {
        let op = cubic_op(1e-3);
        let sol = decaying_solution(&op, 2.0, &JostOptions::default()).unwrap();
        let res = sol.ode_residual(&op);
        assert!(res <= 1e-8, "{res:e}");
        // the second channel is slaved to the potential and decays faster than e^{-x}
        let grid = &sol.grid;
        let fit = crate::ground_state::far_field_fit(
            grid,
            &sol.g.iter().map(|v| v.abs()).collect::<Vec<_>>(),
            (8.0, 16.0),
        )
        .unwrap();
        assert!(fit.rate > 1.5, "{}", fit.rate);
        let w = default_window(&op, 2.0, End::PlusInfinity, sol.x_asym, 1e-14).unwrap();
        let e = expand_in_modes(&sol, &op, End::PlusInfinity, w).unwrap();
        let c = e.coefficients;
        assert!((c[0] - 1.0).abs() < 1e-8 && c[1].abs() < 1e-8, "{c:?}");
        assert!(c[2].abs() < 1e-8 && c[3].abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn saturable_solution_radiates_at_minus_infinity() {
        let nl = Nonlinearity::saturable(0.5).unwrap();
        let gs = solve_ground_state(&nl, &GroundStateParams::new(1.0)).unwrap();
        let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
        for lambda in [1.5, 2.0, 5.0] {
            let sol = decaying_solution(&op, lambda, &JostOptions::default()).unwrap();
            let w = default_window(&op, lambda, End::MinusInfinity, -5.0, 1e-14).unwrap();
            let e = expand_in_modes(&sol, &op, End::MinusInfinity, w).unwrap();
            let osc = e.coefficients[2].hypot(e.coefficients[3]);
            let se = e.standard_errors[2].hypot(e.standard_errors[3]);
            assert!(osc > 100.0 * se, "{lambda}: {osc:e} vs {se:e}");
        }
    }

    #[test]
    fn wronskian_is_constant() {
        let op = cubic_op(1e-2);
        let omega = 1.5f64.sqrt();
        let a = integrate_from_right(&op, 2.5, [0.0, 1.0, 0.0, 0.0], 1e-12).unwrap();
        let b = integrate_from_right(&op, 2.5, [0.0, 0.0, 0.0, omega], 1e-12).unwrap();
        let w = wronskian(&a, &b);
        for (i, v) in w.iter().enumerate() {
            // cancellation between terms limits what can be asked for
            let terms = (a.f[i] * b.fp[i]).abs()
                + (a.g[i] * b.gp[i]).abs()
                + (a.fp[i] * b.f[i]).abs()
                + (a.gp[i] * b.g[i]).abs();
            assert!((v - omega).abs() <= 1e-8 * terms.max(omega), "{i}: {v}");
        }
    }

    #[test]
    fn pure_cos_input_is_recovered() {
        let op = cubic_op(1e-2);
        let w = default_window(&op, 5.0, End::PlusInfinity, 20.0, 1e-14).unwrap();
        let grid = *op.grid();
        let modes = asymptotic_modes(5.0, 1.0).unwrap();
        let mut sol = integrate_from_right(&op, 5.0, [0.0; 4], 1e-12).unwrap();
        for i in 0..grid.len() {
            let s = modes[2].state(grid.x(i), w.x_ref, End::PlusInfinity);
            sol.f[i] = s[0];
            sol.g[i] = s[1];
            sol.fp[i] = s[2];
            sol.gp[i] = s[3];
        }
        let e = expand_in_modes(&sol, &op, End::PlusInfinity, w).unwrap();
        let c = e.coefficients;
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12 && c[3].abs() < 1e-12);
        assert!((c[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_is_linear() {
        let op = cubic_op(1e-2);
        let s1 = decaying_solution(&op, 3.0, &JostOptions::default()).unwrap();
        let s2 = integrate_from_right(&op, 3.0, [0.0, 1.0, 0.0, 0.0], 1e-12).unwrap();
        let mut mix = s1.clone();
        let (al, be) = (0.7, -2.3);
        for i in 0..mix.f.len() {
            mix.f[i] = al * s1.f[i] + be * s2.f[i];
            mix.g[i] = al * s1.g[i] + be * s2.g[i];
            mix.fp[i] = al * s1.fp[i] + be * s2.fp[i];
            mix.gp[i] = al * s1.gp[i] + be * s2.gp[i];
        }
        let w = default_window(&op, 3.0, End::MinusInfinity, -5.0, 1e-14).unwrap();
        let e1 = expand_in_modes(&s1, &op, End::MinusInfinity, w).unwrap();
        let e2 = expand_in_modes(&s2, &op, End::MinusInfinity, w).unwrap();
        let em = expand_in_modes(&mix, &op, End::MinusInfinity, w).unwrap();
        for c in 0..4 {
            let lin = al * e1.coefficients[c] + be * e2.coefficients[c];
            let se = al.abs() * e1.standard_errors[c]
                + be.abs() * e2.standard_errors[c]
                + em.standard_errors[c];
            let scale = e1.coefficients[c].abs() + e2.coefficients[c].abs();
            assert!(
                (em.coefficients[c] - lin).abs() <= se + 1e-12 * scale,
                "{c}"
            );
        }
    }

    #[test]
    fn gap_energies_are_rejected() {
        let op = cubic_op(1e-2);
        assert!(decaying_solution(&op, 0.3, &JostOptions::default()).is_err());
    }
}
