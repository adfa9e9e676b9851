//! Adaptive Dormand–Prince 5(4) integrator with the classical fourth-order
//! continuous extension.
//!
//! The caller receives every accepted step through a sink closure that can
//! sample the dense interpolant and stop the integration. Integration may run
//! in either direction.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// When set, the absolute floor of component `i` is `rtol * peak_i`, where
    /// `peak_i` is the largest `|y_i|` or `|y_{i±N/2}|` seen so far (states are
    /// laid out as values followed by derivatives, so each value shares its
    /// floor with its derivative). Keeps each channel accurate relative to its
    /// own size even when another one grows exponentially. No floor drops below
    /// `1e-20` of the largest peak.
    pub peak_relative: bool,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            peak_relative: false,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// One accepted step and its dense interpolant.
pub struct Step<const N: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Interpolated state at `x` in `[x0, x1]` (either orientation).
    pub fn eval(&self, x: f64) -> [f64; N] {
        let h = self.x1 - self.x0;
        let th = (x - self.x0) / h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
    }

    /// Whether `x` lies within this step (inclusive of the end point).
    pub fn covers(&self, x: f64) -> bool {
        if self.x1 >= self.x0 {
            x >= self.x0 && x <= self.x1
        } else {
            x <= self.x0 && x >= self.x1
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Outcome<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x_end`, handing each accepted
/// step to `sink`.
pub fn integrate<const N: usize, F, S>(
    rhs: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &Options,
    mut sink: S,
) -> Result<Outcome<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&Step<N>) -> Flow,
{
    let span = x_end - x0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut peak: [f64; N] = [0.0; N];
    update_peak(&mut peak, &y0);
    let mut k1 = rhs(x, &y);
    if y.iter().chain(k1.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Integration("non-finite initial data".into()));
    }
    let mut steps = 0;
    let mut rejected = 0;
    if span == 0.0 {
        return Ok(Outcome {
            x,
            y,
            steps,
            rejected,
            stopped: false,
        });
    }
    let scale = |i: usize, a: f64, b: f64, peak: &[f64; N]| {
        floor(opts, peak, i) + opts.rtol * a.abs().max(b.abs())
    };
    let mut h = match opts.h_init {
        Some(h) => h.abs(),
        None => initial_step(&rhs, x, &y, &k1, dir, opts, &peak),
    }
    .min(span.abs())
    .min(opts.h_max);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if steps + rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at x = {x}",
                opts.max_steps
            )));
        }
        let remaining = (x_end - x) * dir;
        let mut final_step = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            final_step = true;
        }
        let hs = h * dir;
        let k2 = rhs(x + C2 * hs, &comb(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(x + C3 * hs, &comb(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            x + C4 * hs,
            &comb(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            x + C5 * hs,
            &comb(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let xph = if final_step { x_end } else { x + hs };
        let k6 = rhs(
            xph,
            &comb(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = comb(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(xph, &y1);
        let mut err = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = scale(i, y[i], y1[i], &peak);
            finite &= y1[i].is_finite() && e.is_finite();
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !finite {
            rejected += 1;
            h *= 0.25;
            if h < 1e-14 * x.abs().max(1.0) {
                return Err(Error::Integration(format!("solution blew up near x = {x}")));
            }
            continue;
        }
        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let step = Step {
                x0: x,
                x1: xph,
                y0: y,
                y1,
                rcont: [
                    y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        hs * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ],
            };
            steps += 1;
            x = xph;
            y = y1;
            k1 = k7;
            update_peak(&mut peak, &y);
            if sink(&step) == Flow::Stop {
                return Ok(Outcome {
                    x,
                    y,
                    steps,
                    rejected,
                    stopped: true,
                });
            }
            if final_step {
                return Ok(Outcome {
                    x,
                    y,
                    steps,
                    rejected,
                    stopped: false,
                });
            }
            // PI step size controller (Hairer, Nørsett & Wanner, II.4)
            let err = err.max(1e-10);
            let mut fac = 0.9 * err.powf(-0.7 / 5.0) * fac_old.powf(0.4 / 5.0);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            fac_old = err;
            h = (h * fac).min(opts.h_max);
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h < 1e-14 * x.abs().max(1.0) {
                return Err(Error::Integration(format!(
                    "step size underflow at x = {x}"
                )));
            }
        }
    }
}

/// Absolute error floor of component `i`. A channel that is still identically
/// zero borrows a floor far below the largest channel.
fn floor<const N: usize>(opts: &Options, peak: &[f64; N], i: usize) -> f64 {
    if opts.peak_relative {
        let global = peak.iter().fold(0.0f64, |m, v| m.max(*v));
        opts.atol.max(opts.rtol * peak[i].max(1e-20 * global))
    } else {
        opts.atol
    }
}

fn update_peak<const N: usize>(peak: &mut [f64; N], y: &[f64; N]) {
    for i in 0..N {
        let partner = if N.is_multiple_of(2) {
            (i + N / 2) % N
        } else {
            i
        };
        peak[i] = peak[i].max(y[i].abs()).max(y[partner].abs());
    }
}

fn initial_step<const N: usize, F>(
    rhs: &F,
    x: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    opts: &Options,
    peak: &[f64; N],
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sc: [f64; N] = std::array::from_fn(|i| floor(opts, peak, i) + opts.rtol * y[i].abs());
    let norm = |v: &[f64; N]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + dir * h0 * f0[i]);
    let f1 = rhs(x + dir * h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.h_max)
}

/// Convenience wrapper: integrates from `x0` and records the dense solution at
/// `points`, which must be ordered in the direction of integration.
pub fn sample<const N: usize, F>(
    rhs: F,
    x0: f64,
    y0: [f64; N],
    points: &[f64],
    opts: &Options,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let Some(&x_end) = points.last() else {
        return Ok(vec![]);
    };
    let mut out = Vec::with_capacity(points.len());
    let mut next = 0;
    while next < points.len() && points[next] == x0 {
        out.push(y0);
        next += 1;
    }
    integrate(rhs, x0, y0, x_end, opts, |step| {
        while next < points.len() && step.covers(points[next]) {
            out.push(if points[next] == step.x1 {
                step.y1
            } else {
                step.eval(points[next])
            });
            next += 1;
        }
        Flow::Continue
    })?;
    if out.len() != points.len() {
        return Err(Error::Integration(format!(
            "dense output produced {} of {} samples",
            out.len(),
            points.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_to_tolerance() {
        let opts = Options {
            rtol: 1e-12,
            atol: 1e-14,
            ..Options::default()
        };
        let out = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            5.0,
            &opts,
            |_| Flow::Continue,
        )
        .unwrap();
        assert!((out.y[0] - 5f64.exp()).abs() < 1e-9 * 5f64.exp());
        assert!(!out.stopped);
    }

    #[test]
    fn oscillator_dense_output_backwards() {
        let opts = Options {
            rtol: 1e-11,
            atol: 1e-13,
            ..Options::default()
        };
        let pts: Vec<f64> = (0..=100).map(|k| 10.0 - 0.1 * k as f64).collect();
        let y10 = [10f64.cos(), -10f64.sin()];
        let ys = sample(|_, y: &[f64; 2]| [y[1], -y[0]], 10.0, y10, &pts, &opts).unwrap();
        for (x, y) in pts.iter().zip(&ys) {
            assert!((y[0] - x.cos()).abs() < 1e-8, "x = {x}");
            assert!((y[1] + x.sin()).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn convergence_with_tolerance() {
        let run = |rtol: f64| {
            let opts = Options {
                rtol,
                atol: rtol * 1e-3,
                ..Options::default()
            };
            let out = integrate(
                |x, y: &[f64; 1]| [-2.0 * x * y[0]],
                0.0,
                [1.0],
                2.0,
                &opts,
                |_| Flow::Continue,
            )
            .unwrap();
            ((out.y[0] - (-4f64).exp()).abs(), out.steps)
        };
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-10);
        assert!(e2 < e1);
        assert!(n2 > n1);
        assert!(e2 < 1e-9);
    }

    #[test]
    fn sink_can_stop() {
        let out = integrate(
            |_, _y: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            &Options::default(),
            |s| {
                if s.y1[0] > 1.0 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            },
        )
        .unwrap();
        assert!(out.stopped);
        assert!(out.x < 10.0);
    }

    #[test]
    fn peak_relative_keeps_small_component_accurate() {
        // (y0, y2) grows like e^{5x}; (y1, y3) is a unit oscillator decoupled from it
        let opts = Options {
            rtol: 1e-11,
            atol: 1e-300,
            peak_relative: true,
            ..Options::default()
        };
        let out = integrate(
            |_, y: &[f64; 4]| [y[2], y[3], 25.0 * y[0], -y[1]],
            0.0,
            [1.0, 1.0, 5.0, 0.0],
            8.0,
            &opts,
            |_| Flow::Continue,
        )
        .unwrap();
        assert!((out.y[1] - 8f64.cos()).abs() < 1e-8);
    }
}
