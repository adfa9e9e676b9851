//! Even, positive, monotonically decaying solutions of
//! `Q'' - μQ + F(Q²)Q = 0`.
//!
//! `Q(0)` is found by shooting from the origin with `Q'(0) = 0` and bisecting
//! between profiles that cross zero (too large) and profiles that turn back up
//! (too small). The core of the profile comes from that shot; once `Q` has
//! dropped to half its peak the profile is continued with the first integral
//! `Q' = -Q √(μ - G(Q²)/Q²)`, which has no unstable direction and therefore
//! reaches the far field without the exponential blow-up of the shot. Below the
//! trust threshold the samples are replaced by the fitted tail `c₀ e^{-rate x}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d1_five_point, hermite, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::ode::{self, Flow, Options};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    pub mu: f64,
    /// Half-width of the grid; defaults to `30/√μ`.
    pub r: Option<f64>,
    /// Grid spacing; defaults to `1e-3/√μ`.
    pub h: Option<f64>,
    /// Target for the ODE residual.
    pub tol: f64,
    /// Samples below this value are replaced by the fitted exponential tail.
    pub trust_eps: f64,
}

impl GroundStateParams {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            r: None,
            h: None,
            tol: 1e-10,
            trust_eps: 1e-12,
        }
    }

    pub fn with_grid(mut self, r: f64, h: f64) -> Self {
        self.r = Some(r);
        self.h = Some(h);
        self
    }

    pub fn resolved_r(&self) -> f64 {
        self.r.unwrap_or(30.0 / self.mu.sqrt())
    }

    pub fn resolved_h(&self) -> f64 {
        self.h.unwrap_or(1e-3 / self.mu.sqrt())
    }
}

/// Least-squares fit of `log|y| = log|A| - rate·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldFit {
    /// Signed amplitude `A`.
    pub amplitude: f64,
    pub rate: f64,
    /// RMS of the residual of the log-linear fit.
    pub residual: f64,
    pub window: (f64, f64),
    /// Set when the residual exceeds [`FarFieldFit::WARN_RESIDUAL`]: the window
    /// is too close to the core for the pure exponential law.
    pub warning: bool,
}

impl FarFieldFit {
    pub const WARN_RESIDUAL: f64 = 1e-6;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub mu: f64,
    pub grid: Grid,
    pub q: Vec<f64>,
    pub qp: Vec<f64>,
    /// Far-field amplitude `c₀`.
    pub c0: f64,
    /// Fitted far-field decay rate (≈ √μ).
    pub rate: f64,
    /// `Q(0)`.
    pub shoot_value: f64,
    /// Last abscissa at which the computed profile exceeded the trust threshold.
    pub trust_edge: f64,
    pub fit: FarFieldFit,
}

/// Outcome of one shot from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// `Q` crossed zero: `Q(0)` too large.
    Over,
    /// `Q'` turned positive while `Q > 0`: `Q(0)` too small.
    Under,
    /// Neither happened before `x_max`.
    Undecided,
}

fn profile_rhs(nl: &Nonlinearity, mu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_, y| {
        let f = nl.eval(y[0] * y[0]).map(|e| e.f).unwrap_or(f64::NAN);
        [y[1], mu * y[0] - f * y[0]]
    }
}

fn shoot(nl: &Nonlinearity, mu: f64, q0: f64, x_max: f64, opts: &Options) -> Result<Shot> {
    if q0 * q0 > nl.max_arg() {
        return Err(Error::Extrapolation {
            s: q0 * q0,
            max: nl.max_arg(),
        });
    }
    let mut verdict = Shot::Undecided;
    ode::integrate(profile_rhs(nl, mu), 0.0, [q0, 0.0], x_max, opts, |step| {
        if step.y1[0] < 0.0 {
            verdict = Shot::Over;
            Flow::Stop
        } else if step.y1[1] > 0.0 {
            verdict = Shot::Under;
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok(verdict)
}

/// Bisection on `Q(0)`; returns the converged shooting value.
fn find_shoot_value(nl: &Nonlinearity, mu: f64, x_max: f64, opts: &Options) -> Result<f64> {
    let mut lo = None;
    let mut hi = None;
    let mut q = 1e-3 * mu.sqrt();
    let q_cap = (1e4 * (1.0 + mu.sqrt())).min(nl.max_arg().sqrt());
    while q <= q_cap {
        match shoot(nl, mu, q, x_max, opts)? {
            Shot::Under => lo = Some(q),
            Shot::Over => {
                hi = Some(q);
                break;
            }
            Shot::Undecided => return Ok(q),
        }
        q *= 1.25;
    }
    let (Some(mut lo), Some(mut hi)) = (lo, hi) else {
        return Err(Error::BracketNotFound(format!(
            "no sign change of the shooting classification for μ = {mu} with Q(0) up to {q_cap:.3e}; \
             the nonlinearity may not admit a ground state at this frequency"
        )));
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        match shoot(nl, mu, mid, x_max, opts)? {
            Shot::Under => lo = mid,
            Shot::Over => hi = mid,
            Shot::Undecided => return Ok(mid),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves for the ground state on the symmetric grid described by `params`.
pub fn solve_ground_state(nl: &Nonlinearity, params: &GroundStateParams) -> Result<GroundState> {
    let mu = params.mu;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "μ must be positive, got {mu}"
        )));
    }
    if !(params.tol > 0.0) {
        return Err(Error::InvalidParameters("tol must be positive".into()));
    }
    let grid = Grid::symmetric(params.resolved_r(), params.resolved_h())?;
    let r = grid.r();
    let rtol = (params.tol * 1e-2).clamp(1e-14, 1e-8);
    let opts = Options {
        rtol,
        atol: rtol * 1e-3,
        ..Options::default()
    };

    let q0 = find_shoot_value(nl, mu, r, &opts)?;

    let n = grid.len();
    let c = grid.center();
    let mut q = vec![0.0; n];
    let mut qp = vec![0.0; n];

    // core: second-order shot until Q has dropped to half its peak
    let mut next = c;
    let mut switch = (0.0, q0);
    ode::integrate(profile_rhs(nl, mu), 0.0, [q0, 0.0], r, &opts, |step| {
        while next < n && step.covers(grid.x(next)) {
            let y = step.eval(grid.x(next));
            q[next] = y[0];
            qp[next] = y[1];
            next += 1;
        }
        switch = (step.x1, step.y1[0]);
        if step.y1[0] <= 0.5 * q0 {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    qp[c] = 0.0;

    // tail: first-integral flow, accurate relative to Q itself
    if next < n {
        let slope = |y: f64| -> f64 {
            let gs = nl.g_over_s(y * y).unwrap_or(f64::NAN);
            -y * (mu - gs).max(0.0).sqrt()
        };
        let tail_opts = Options {
            rtol,
            atol: 1e-300,
            ..Options::default()
        };
        let points: Vec<f64> = (next..n).map(|i| grid.x(i)).collect();
        let ys = ode::sample(
            |_, y: &[f64; 1]| [slope(y[0])],
            switch.0,
            [switch.1],
            &points,
            &tail_opts,
        )?;
        for (k, y) in ys.iter().enumerate() {
            q[next + k] = y[0];
            qp[next + k] = slope(y[0]);
        }
    }

    // mirror onto x < 0
    for i in 1..=grid.half {
        q[c - i] = q[c + i];
        qp[c - i] = -qp[c + i];
    }

    let trust_edge = (c..n)
        .rev()
        .find(|&i| q[i] > params.trust_eps)
        .map(|i| grid.x(i))
        .unwrap_or(0.0);
    let span = trust_edge.min(r);
    let fit = far_field_fit(&grid, &q, (0.5 * span, 0.9 * span))?;
    if trust_edge < r {
        let i_edge = grid.nearest(trust_edge);
        for i in i_edge + 1..n {
            let e = fit.amplitude * (-fit.rate * grid.x(i)).exp();
            q[i] = e;
            qp[i] = -fit.rate * e;
            q[2 * c - i] = e;
            qp[2 * c - i] = fit.rate * e;
        }
    }

    let gs = GroundState {
        mu,
        grid,
        q,
        qp,
        c0: fit.amplitude,
        rate: fit.rate,
        shoot_value: q0,
        trust_edge,
        fit,
    };
    gs.check_hypotheses()?;
    Ok(gs)
}

/// Fits `y ≈ A e^{-rate x}` on `window` by least squares on `log|y|`.
pub fn far_field_fit(grid: &Grid, y: &[f64], window: (f64, f64)) -> Result<FarFieldFit> {
    grid.check(y.len())?;
    let (lo, hi) = (grid.ceil_index(window.0), grid.floor_index(window.1));
    if hi <= lo {
        return Err(Error::InvalidParameters(format!(
            "fit window {window:?} contains fewer than two grid points"
        )));
    }
    let sign = y[lo].signum();
    if y[lo] == 0.0 || y[lo..=hi].iter().any(|v| v.signum() != sign || *v == 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "samples change sign or vanish in the fit window {window:?}"
        )));
    }
    let m = (hi - lo + 1) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in lo..=hi {
        let (x, l) = (grid.x(i), y[i].abs().ln());
        sx += x;
        sy += l;
        sxx += x * x;
        sxy += x * l;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let icpt = (sy - slope * sx) / m;
    let residual = ((lo..=hi)
        .map(|i| (y[i].abs().ln() - icpt - slope * grid.x(i)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(FarFieldFit {
        amplitude: sign * icpt.exp(),
        rate: -slope,
        residual,
        window,
        warning: residual > FarFieldFit::WARN_RESIDUAL,
    })
}

/// `max |Q'² - μQ² + G(Q²)|` over the samples.
pub fn first_integral_residual(mu: f64, q: &[f64], qp: &[f64], nl: &Nonlinearity) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (a, b) in q.iter().zip(qp) {
        let g = nl.eval(a * a)?.g;
        worst = worst.max((b * b - mu * a * a + g).abs());
    }
    Ok(worst)
}

impl GroundState {
    /// Wraps externally supplied samples (e.g. a closed-form profile).
    pub fn from_profile(mu: f64, grid: Grid, q: Vec<f64>, qp: Vec<f64>) -> Result<Self> {
        grid.check(q.len())?;
        grid.check(qp.len())?;
        let r = grid.r();
        let fit = far_field_fit(&grid, &q, (0.5 * r, 0.9 * r)).unwrap_or(FarFieldFit {
            amplitude: 0.0,
            rate: mu.sqrt(),
            residual: f64::INFINITY,
            window: (0.5 * r, 0.9 * r),
            warning: true,
        });
        let c = grid.center();
        Ok(Self {
            mu,
            grid,
            shoot_value: q[c],
            trust_edge: r,
            c0: fit.amplitude,
            rate: fit.rate,
            fit,
            q,
            qp,
        })
    }

    /// Positivity on the grid and strict decay on `(0, R]`.
    pub fn check_hypotheses(&self) -> Result<()> {
        if let Some(i) = self.q.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::HypothesisViolation(format!(
                "profile is not positive at x = {}",
                self.grid.x(i)
            )));
        }
        let c = self.grid.center();
        if let Some(i) = (c + 1..self.grid.len()).find(|&i| !(self.qp[i] < 0.0)) {
            return Err(Error::HypothesisViolation(format!(
                "Q' >= 0 at x = {} > 0: the profile is not monotone",
                self.grid.x(i)
            )));
        }
        Ok(())
    }

    pub fn far_field_fit(&self, window: (f64, f64)) -> Result<FarFieldFit> {
        far_field_fit(&self.grid, &self.q, window)
    }

    /// The same fit on `Q'`; the amplitude comes out negative.
    pub fn far_field_fit_derivative(&self, window: (f64, f64)) -> Result<FarFieldFit> {
        far_field_fit(&self.grid, &self.qp, window)
    }

    pub fn first_integral_residual(&self, nl: &Nonlinearity) -> Result<f64> {
        first_integral_residual(self.mu, &self.q, &self.qp, nl)
    }

    /// `max |Q'' - μQ + F(Q²)Q|` with `Q''` from a five-point difference of `Q'`.
    pub fn ode_residual(&self, nl: &Nonlinearity) -> Result<f64> {
        let n = self.grid.len();
        let mut worst: f64 = 0.0;
        for i in 2..n - 2 {
            let qpp = d1_five_point(&self.qp, i, self.grid.h);
            let q = self.q[i];
            worst = worst.max((qpp - self.mu * q + nl.eval(q * q)?.f * q).abs());
        }
        Ok(worst)
    }

    /// `(Q(x), Q'(x))` at any `x`: Hermite interpolation on the grid, the fitted
    /// tail beyond it.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let r = self.grid.r();
        if x.abs() <= r {
            hermite(&self.grid, &self.q, &self.qp, x)
        } else {
            let e = self.c0 * (-self.rate * x.abs()).exp();
            (e, -self.rate * e * x.signum())
        }
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            mu: self.mu,
            r: self.grid.r(),
            h: self.grid.h,
            points: self.grid.len(),
            shoot_value: self.shoot_value,
            c0: self.c0,
            rate: self.rate,
            trust_edge: self.trust_edge,
            fit_residual: self.fit.residual,
        }
    }
}

/// Scalar metadata of a ground state, embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub mu: f64,
    pub r: f64,
    pub h: f64,
    pub points: usize,
    pub shoot_value: f64,
    pub c0: f64,
    pub rate: f64,
    pub trust_edge: f64,
    pub fit_residual: f64,
}
