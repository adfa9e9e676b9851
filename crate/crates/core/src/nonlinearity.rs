//! The focusing nonlinearity `F` together with `F'` and the antiderivative
//! `G(s) = ∫₀ˢ F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `F(s) = s^p`, `p >= 1`.
    Power,
    /// `F(s) = s - γ s²`.
    CubicQuintic,
    /// `F(s) = s / (1 + β s)`.
    Saturable,
    /// Monotone cubic interpolation through user samples.
    Tabulated,
}

/// Serializable description of a nonlinearity, as it appears in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub family: Family,
    #[serde(default)]
    pub params: Vec<f64>,
    /// Sample points `(s, F(s))` for the tabulated family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

/// `(F(s), F'(s), G(s))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eval {
    pub f: f64,
    pub df: f64,
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Power(f64),
    CubicQuintic(f64),
    Saturable(f64),
    Tabulated(Table),
}

/// Immutable after construction; `F(0) = 0` holds for every instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    kind: Kind,
}

impl Nonlinearity {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "power exponent must satisfy p >= 1, got {p}"
            )));
        }
        Ok(Self {
            kind: Kind::Power(p),
        })
    }

    /// The cubic NLS, `F(s) = s`.
    pub fn cubic() -> Self {
        Self {
            kind: Kind::Power(1.0),
        }
    }

    pub fn cubic_quintic(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameters(format!("γ = {gamma}")));
        }
        Ok(Self {
            kind: Kind::CubicQuintic(gamma),
        })
    }

    pub fn saturable(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "saturation parameter must be positive, got {beta}"
            )));
        }
        Ok(Self {
            kind: Kind::Saturable(beta),
        })
    }

    /// Monotone (Fritsch–Butland) cubic through `points`. A leading `(0, 0)` is
    /// inserted when the table starts at `s > 0`; a table starting at `s = 0`
    /// must have `F(0) = 0`.
    pub fn tabulated(points: &[[f64; 2]]) -> Result<Self> {
        Ok(Self {
            kind: Kind::Tabulated(Table::new(points)?),
        })
    }

    pub fn from_spec(spec: &NonlinearitySpec) -> Result<Self> {
        let one = |name: &str| -> Result<f64> {
            match spec.params.as_slice() {
                [x] => Ok(*x),
                other => Err(Error::InvalidParameters(format!(
                    "{name} takes exactly one parameter, got {}",
                    other.len()
                ))),
            }
        };
        match spec.family {
            Family::Power => Self::power(one("power")?),
            Family::CubicQuintic => Self::cubic_quintic(one("cubic_quintic")?),
            Family::Saturable => Self::saturable(one("saturable")?),
            Family::Tabulated => match &spec.table {
                Some(t) => Self::tabulated(t),
                None => Err(Error::InvalidParameters(
                    "tabulated family requires a `table`".into(),
                )),
            },
        }
    }

    pub fn spec(&self) -> NonlinearitySpec {
        let (family, params, table) = match &self.kind {
            Kind::Power(p) => (Family::Power, vec![*p], None),
            Kind::CubicQuintic(g) => (Family::CubicQuintic, vec![*g], None),
            Kind::Saturable(b) => (Family::Saturable, vec![*b], None),
            Kind::Tabulated(t) => (
                Family::Tabulated,
                vec![],
                Some(t.s.iter().zip(&t.f).map(|(s, f)| [*s, *f]).collect()),
            ),
        };
        NonlinearitySpec {
            family,
            params,
            table,
        }
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Power(_) => Family::Power,
            Kind::CubicQuintic(_) => Family::CubicQuintic,
            Kind::Saturable(_) => Family::Saturable,
            Kind::Tabulated(_) => Family::Tabulated,
        }
    }

    /// Largest admissible argument (finite only for tabulated data).
    pub fn max_arg(&self) -> f64 {
        match &self.kind {
            Kind::Tabulated(t) => *t.s.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    pub fn eval(&self, s: f64) -> Result<Eval> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!(
                "nonlinearity evaluated at s = {s} < 0"
            )));
        }
        Ok(match &self.kind {
            Kind::Power(p) => {
                let p = *p;
                if p == 1.0 {
                    Eval {
                        f: s,
                        df: 1.0,
                        g: 0.5 * s * s,
                    }
                } else {
                    let sp = s.powf(p);
                    Eval {
                        f: sp,
                        df: p * s.powf(p - 1.0),
                        g: sp * s / (p + 1.0),
                    }
                }
            }
            Kind::CubicQuintic(gamma) => Eval {
                f: s - gamma * s * s,
                df: 1.0 - 2.0 * gamma * s,
                g: 0.5 * s * s - gamma * s * s * s / 3.0,
            },
            Kind::Saturable(beta) => {
                let d = 1.0 + beta * s;
                // G = s/β - ln(1 + βs)/β², written to avoid cancellation for small βs.
                let bs = beta * s;
                let g = if bs < 1e-3 {
                    s * s * (0.5 - bs / 3.0 + bs * bs / 4.0 - bs * bs * bs / 5.0)
                } else {
                    (bs - bs.ln_1p()) / (beta * beta)
                };
                Eval {
                    f: s / d,
                    df: 1.0 / (d * d),
                    g,
                }
            }
            Kind::Tabulated(t) => t.eval(s)?,
        })
    }

    /// `G(s)/s`, continuous at `s = 0` where it vanishes.
    pub fn g_over_s(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            self.eval(0.0)?;
            return Ok(0.0);
        }
        Ok(self.eval(s)?.g / s)
    }
}

/// Piecewise cubic Hermite data with monotonicity-preserving slopes.
#[derive(Clone, Debug, PartialEq)]
struct Table {
    s: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
    /// `G` at the nodes.
    cum: Vec<f64>,
}

impl Table {
    fn new(points: &[[f64; 2]]) -> Result<Self> {
        let mut s: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let mut f: Vec<f64> = points.iter().map(|p| p[1]).collect();
        if s.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("non-finite table entry".into()));
        }
        match s.first() {
            None => return Err(Error::InvalidParameters("empty table".into())),
            Some(&s0) if s0 < 0.0 => {
                return Err(Error::InvalidParameters("table starts at s < 0".into()))
            }
            Some(&s0) if s0 > 0.0 => {
                s.insert(0, 0.0);
                f.insert(0, 0.0);
            }
            Some(_) => {
                if f[0] != 0.0 {
                    return Err(Error::InvalidParameters(format!(
                        "tabulated F(0) = {} but F(0) = 0 is required",
                        f[0]
                    )));
                }
            }
        }
        if s.len() < 3 {
            return Err(Error::InvalidParameters(
                "table needs at least three points including s = 0".into(),
            ));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameters(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        let n = s.len();
        let hs: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / hs[i]).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            if del[k - 1] * del[k] > 0.0 {
                let w1 = 2.0 * hs[k] + hs[k - 1];
                let w2 = hs[k] + 2.0 * hs[k - 1];
                d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
            }
        }
        d[0] = end_slope(hs[0], hs[1], del[0], del[1]);
        d[n - 1] = end_slope(hs[n - 2], hs[n - 3], del[n - 2], del[n - 3]);
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            cum[i + 1] =
                cum[i] + hs[i] * (0.5 * (f[i] + f[i + 1]) + hs[i] * (d[i] - d[i + 1]) / 12.0);
        }
        Ok(Self { s, f, d, cum })
    }

    fn eval(&self, x: f64) -> Result<Eval> {
        let max = *self.s.last().unwrap();
        if x > max {
            return Err(Error::Extrapolation { s: x, max });
        }
        let i = match self.s.partition_point(|&si| si <= x) {
            0 => 0,
            k => (k - 1).min(self.s.len() - 2),
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (x - self.s[i]) / h;
        let (y0, y1, d0, d1) = (self.f[i], self.f[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let f = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let df = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        let g = self.cum[i]
            + h * ((0.5 * t4 - t3 + t) * y0
                + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * d0
                + (-0.5 * t4 + t3) * y1
                + (0.25 * t4 - t3 / 3.0) * d1);
        Ok(Eval { f, df, g })
    }
}

/// Three-point end slope, limited to keep the interpolant monotone.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
