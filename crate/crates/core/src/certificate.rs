//! Per-energy certificates that `λ` in the essential spectrum carries no
//! eigenvalue, scans over energy grids, and the decoupled-well control that
//! does carry one.
//!
//! For `λ >= μ` let `w = (f, g)` decay at `+∞` with unit leading coefficient,
//! and `u = f + g`, `v = f - g`. An `L²` eigenfunction splits into even and odd
//! parts; the even part needs `v'(0) = 0`, the odd part `v(0) = 0`. A record
//! therefore certifies `λ` when both `|v(0)|` and `|v'(0)|` stay away from zero
//! and the solution visibly fails to decay at `-∞`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d1_five_point, hermite, Grid};
use crate::ground_state::GroundStateSummary;
use crate::jost::{
    decaying_solution, default_window, expand_in_modes, End, JostOptions, JostSolution,
};
use crate::operator::{LinearizedOperator, PotentialMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoEmbeddedEigenvalue,
    Inconclusive,
    EmbeddedCandidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Lower bound for `min(|v(0)|, |v'(0)|/√μ) / scale`.
    pub cert: f64,
    /// Lower bound for the normalized mismatch at `-∞`.
    pub mismatch: f64,
    /// Factor applied to both thresholds at `|λ| = μ`.
    pub threshold_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            cert: 1e-3,
            mismatch: 1e-3,
            threshold_factor: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub thresholds: Thresholds,
    pub jost: JostOptions,
    /// Half-width (in units of `1/√μ`) of the window `[-ρ, ρ]` whose sup
    /// normalizes the mismatch; `-ρ` is also the reference point of the modes
    /// at `-∞`, and `[0, ρ]` normalizes `v(0)`, `v'(0)`.
    pub scale_radius: f64,
    /// Relative distance from `±μ` inside which `λ` is treated as a threshold.
    pub threshold_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            jost: JostOptions::default(),
            scale_radius: 5.0,
            threshold_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub lambda: f64,
    /// `v(0)` with the decaying solution's leading coefficient set to 1.
    pub v0: f64,
    /// `v'(0)` from a five-point difference.
    pub v0p: f64,
    /// `sup_{[0, ρ]} max(|u|, |v|)`.
    pub v_scale: f64,
    /// `min(|v(0)|, |v'(0)|/√μ) / v_scale`.
    pub parity_min: f64,
    /// `u > 0` on `(0, R]`.
    pub u_positive: bool,
    /// `v > 0` on `(0, R]` for `λ >= μ`, `v < 0` for `λ <= -μ`.
    pub v_signed: bool,
    /// `‖(c_grow, c_osc1, c_osc2)‖` at `-∞` over `sup_{[-ρ, ρ]} max(|f|, |g|)`.
    pub mismatch: f64,
    /// Signed growing coefficient at `-∞`, same normalization.
    pub c_grow: f64,
    /// `‖(c_osc1, c_osc2)‖`, same normalization.
    pub c_osc: f64,
    /// Standard error of the mismatch from the mode fit.
    pub mismatch_error: f64,
    pub fit_condition: f64,
    /// `|λ| = μ`: const/linear modes and relaxed thresholds.
    pub threshold: bool,
    pub verdict: Verdict,
    /// Failure description when the record could not be computed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl CertificateRecord {
    fn failed(lambda: f64, err: &Error) -> Self {
        Self {
            lambda,
            v0: f64::NAN,
            v0p: f64::NAN,
            v_scale: f64::NAN,
            parity_min: f64::NAN,
            u_positive: false,
            v_signed: false,
            mismatch: f64::NAN,
            c_grow: f64::NAN,
            c_osc: f64::NAN,
            mismatch_error: f64::NAN,
            fit_condition: f64::NAN,
            threshold: false,
            verdict: Verdict::Inconclusive,
            error: Some(err.to_string()),
        }
    }
}

/// Verdict from the normalized quantities.
pub fn verdict(parity_min: f64, mismatch: f64, th: &Thresholds, threshold: bool) -> Verdict {
    let f = if threshold { th.threshold_factor } else { 1.0 };
    if mismatch < th.mismatch * f {
        Verdict::EmbeddedCandidate
    } else if parity_min >= th.cert * f && mismatch >= th.mismatch * f {
        Verdict::NoEmbeddedEigenvalue
    } else {
        Verdict::Inconclusive
    }
}

/// Record at `-λ` from one at `λ`, via `S(f, g) = (g, f)`: `u` is unchanged and
/// `v` changes sign.
pub fn reflect_record(rec: &CertificateRecord) -> CertificateRecord {
    CertificateRecord {
        lambda: -rec.lambda,
        v0: -rec.v0,
        v0p: -rec.v0p,
        ..rec.clone()
    }
}

/// Whether `y > 0` on grid indices `from..`, refining local minima with
/// Hermite interpolation so a dip between samples is not missed.
pub fn positive_from(grid: &Grid, y: &[f64], dy: &[f64], from: usize) -> bool {
    let n = y.len();
    for i in from..n {
        if !(y[i] > 0.0) {
            return false;
        }
        let is_min = i > 0 && i + 1 < n && y[i] <= y[i - 1] && y[i] <= y[i + 1];
        if is_min {
            let (x0, h) = (grid.x(i), grid.h);
            for k in -7..=7 {
                let x = x0 + h * k as f64 / 8.0;
                if !(hermite(grid, y, dy, x).0 > 0.0) {
                    return false;
                }
            }
        }
    }
    true
}

/// Certificate for an arbitrary multiple of the solution decaying at `+∞`.
/// The solution is first oriented so that its leading coefficient at `+∞` is
/// positive.
pub fn certify_solution(
    sol: &JostSolution,
    op: &LinearizedOperator,
    opts: &CertifyOptions,
) -> Result<CertificateRecord> {
    let lambda = sol.lambda;
    let mu = sol.mu;
    let grid = sol.grid;
    let positive_branch = lambda > 0.0;
    let ia = grid.nearest(sol.x_asym);
    let lead = if positive_branch {
        sol.f[ia]
    } else {
        sol.g[ia]
    };
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Integration(format!(
            "leading coefficient at +inf is {lead}"
        )));
    }
    let o = lead.signum();
    let n = grid.len();
    let u: Vec<f64> = (0..n).map(|i| o * (sol.f[i] + sol.g[i])).collect();
    let v: Vec<f64> = (0..n).map(|i| o * (sol.f[i] - sol.g[i])).collect();
    let up: Vec<f64> = (0..n).map(|i| o * (sol.fp[i] + sol.gp[i])).collect();
    let vp: Vec<f64> = (0..n).map(|i| o * (sol.fp[i] - sol.gp[i])).collect();

    let c = grid.center();
    let v0 = v[c];
    let v0p = d1_five_point(&v, c, grid.h);
    let rho = opts.scale_radius / mu.sqrt();
    let v_scale =
        (c..=grid.floor_index(rho)).fold(0.0f64, |m, i| m.max(u[i].abs()).max(v[i].abs()));
    let parity_min = v0.abs().min(v0p.abs() / mu.sqrt()) / v_scale;

    let u_positive = positive_from(&grid, &u, &up, c + 1);
    let v_signed = if positive_branch {
        positive_from(&grid, &v, &vp, c + 1)
    } else {
        let nv: Vec<f64> = v.iter().map(|e| -e).collect();
        let nvp: Vec<f64> = vp.iter().map(|e| -e).collect();
        positive_from(&grid, &nv, &nvp, c + 1)
    };

    let window = default_window(op, lambda, End::MinusInfinity, -rho, opts.jost.negligible)?;
    let e = expand_in_modes(sol, op, End::MinusInfinity, window)?;
    let scale = sol.sup_on(-rho, rho);
    let [_, grow, c1, c2] = e.coefficients;
    let [_, sg, s1, s2] = e.standard_errors;
    let c_grow = o * grow / scale;
    let c_osc = c1.hypot(c2) / scale;
    let mismatch = c_grow.hypot(c_osc);
    let mismatch_error = sg.hypot(s1).hypot(s2) / scale;

    let threshold = ((lambda.abs() - mu) / mu).abs() <= opts.threshold_tol;
    Ok(CertificateRecord {
        lambda,
        v0,
        v0p,
        v_scale,
        parity_min,
        u_positive,
        v_signed,
        mismatch,
        c_grow,
        c_osc,
        mismatch_error,
        fit_condition: e.condition,
        threshold,
        verdict: verdict(parity_min, mismatch, &opts.thresholds, threshold),
        error: None,
    })
}

/// Certificate at `λ`; `λ <= -μ` is computed at `-λ` and reflected.
pub fn certify_lambda(
    op: &LinearizedOperator,
    lambda: f64,
    opts: &CertifyOptions,
) -> Result<CertificateRecord> {
    if lambda < 0.0 {
        return certify_lambda_direct(op, -lambda, opts).map(|r| reflect_record(&r));
    }
    certify_lambda_direct(op, lambda, opts)
}

/// Certificate at `λ` computed without reflection, for either sign of `λ`.
pub fn certify_lambda_direct(
    op: &LinearizedOperator,
    lambda: f64,
    opts: &CertifyOptions,
) -> Result<CertificateRecord> {
    let mu = op.mu;
    if !(lambda.abs() >= mu) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} is not in the essential spectrum (|lambda| >= {mu})"
        )));
    }
    let sol = decaying_solution(op, lambda, &opts.jost)?;
    certify_solution(&sol, op, opts)
}

/// Evenly spaced energies `lmin, …, lmax`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lmin: f64,
    pub lmax: f64,
    pub n: usize,
}

impl LambdaGrid {
    pub fn new(lmin: f64, lmax: f64, n: usize) -> Self {
        Self { lmin, lmax, n }
    }

    /// The grid must be non-empty, strictly increasing and lie on one side of
    /// the gap.
    pub fn validate(&self, mu: f64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("lambda grid is empty (n = 0)".into()));
        }
        if !(self.lmin.is_finite() && self.lmax.is_finite()) {
            return Err(Error::Config("lambda bounds must be finite".into()));
        }
        if self.n == 1 && self.lmin != self.lmax {
            return Err(Error::Config("n = 1 needs lmin = lmax".into()));
        }
        if self.n > 1 && !(self.lmin < self.lmax) {
            return Err(Error::Config(format!(
                "lambda grid must increase (lmin = {}, lmax = {})",
                self.lmin, self.lmax
            )));
        }
        if !(self.lmin >= mu || self.lmax <= -mu) {
            return Err(Error::Config(format!(
                "lambda grid [{}, {}] must lie in [mu, inf) or (-inf, -mu] with mu = {mu}",
                self.lmin, self.lmax
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lmin];
        }
        let step = (self.lmax - self.lmin) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.lmax
                } else {
                    self.lmin + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub count: usize,
    pub no_embedded: usize,
    pub inconclusive: usize,
    pub embedded_candidates: usize,
    pub failed: usize,
    pub all_certified: bool,
    pub min_parity: f64,
    pub min_mismatch: f64,
    pub all_u_positive: bool,
    pub all_v_signed: bool,
    /// Largest local Lipschitz bound for the mismatch along the grid. The
    /// bound on an interval is ten times the median slope of its six
    /// neighbours plus a noise floor.
    pub mismatch_lipschitz: f64,
    /// Grid intervals whose mismatch slope exceeds their local bound.
    pub mismatch_jumps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub mu: f64,
    pub lambda_grid: LambdaGrid,
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state: Option<GroundStateSummary>,
    pub records: Vec<CertificateRecord>,
    pub summary: ScanSummary,
}

const JUMP_FACTOR: f64 = 10.0;
/// Mismatch changes below this are never flagged.
const JUMP_FLOOR: f64 = 1e-8;

fn summarize(records: &[CertificateRecord]) -> ScanSummary {
    let count_of = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
    let ok: Vec<&CertificateRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let fmin = |f: &dyn Fn(&CertificateRecord) -> f64| {
        ok.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min)
    };
    let slopes: Vec<f64> = records
        .windows(2)
        .map(|w| (w[1].mismatch - w[0].mismatch).abs() / (w[1].lambda - w[0].lambda))
        .collect();
    let bounds: Vec<f64> = (0..slopes.len())
        .map(|i| {
            let mut near: Vec<f64> = (i.saturating_sub(3)..(i + 4).min(slopes.len()))
                .filter(|&j| j != i && slopes[j].is_finite())
                .map(|j| slopes[j])
                .collect();
            near.sort_by(f64::total_cmp);
            let dl = records[i + 1].lambda - records[i].lambda;
            let median = near.get(near.len() / 2).copied().unwrap_or(0.0);
            JUMP_FACTOR * median + JUMP_FLOOR / dl
        })
        .collect();
    let jumps = (0..slopes.len())
        .filter(|&i| !(slopes[i] <= bounds[i]))
        .collect();
    let lipschitz = bounds.iter().copied().fold(0.0, f64::max);
    let no_embedded = count_of(Verdict::NoEmbeddedEigenvalue);
    ScanSummary {
        count: records.len(),
        no_embedded,
        inconclusive: count_of(Verdict::Inconclusive),
        embedded_candidates: count_of(Verdict::EmbeddedCandidate),
        failed: records.len() - ok.len(),
        all_certified: no_embedded == records.len(),
        min_parity: fmin(&|r| r.parity_min),
        min_mismatch: fmin(&|r| r.mismatch),
        all_u_positive: records.iter().all(|r| r.u_positive),
        all_v_signed: records.iter().all(|r| r.v_signed),
        mismatch_lipschitz: lipschitz,
        mismatch_jumps: jumps,
    }
}

/// Certificates on every grid energy, computed in parallel and returned in
/// grid order. Per-energy failures become inconclusive records.
pub fn scan_embedded(
    op: &LinearizedOperator,
    grid: &LambdaGrid,
    opts: &CertifyOptions,
) -> Result<ScanReport> {
    grid.validate(op.mu)?;
    let records: Vec<CertificateRecord> = grid
        .points()
        .into_par_iter()
        .map(|l| certify_lambda(op, l, opts).unwrap_or_else(|e| CertificateRecord::failed(l, &e)))
        .collect();
    let summary = summarize(&records);
    Ok(ScanReport {
        mu: op.mu,
        lambda_grid: *grid,
        thresholds: opts.thresholds,
        ground_state: None,
        records,
        summary,
    })
}

/// Eigenvalues `(s - n)² - μ`, `s = (√(1 + 4d) - 1)/2`, of `∂² - μ + d sech²`
/// that lie in `[μ, ∞)`.
pub fn poschl_teller_embedded(mu: f64, depth: f64) -> Vec<f64> {
    if !(depth > 0.0) {
        return vec![];
    }
    let s = ((1.0 + 4.0 * depth).sqrt() - 1.0) / 2.0;
    (0..)
        .map(|n| s - n as f64)
        .take_while(|t| *t > 0.0)
        .map(|t| t * t - mu)
        .filter(|l| *l >= mu)
        .collect()
}

/// The decoupled operator `ℋ₀ + diag(d sech², -d sech²)` on the default grid
/// for `μ`.
pub fn control_operator(
    mu: f64,
    depth: f64,
    r: Option<f64>,
    h: Option<f64>,
) -> Result<LinearizedOperator> {
    if !(mu > 0.0) {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    let r = r.unwrap_or(30.0 / mu.sqrt());
    let h = h.unwrap_or(1e-3 / mu.sqrt());
    let grid = Grid::symmetric(r, h)?;
    let pot = PotentialMatrix::decoupled(grid, move |x| depth / x.cosh().powi(2));
    Ok(LinearizedOperator::new(mu, pot))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub mu: f64,
    pub depth: f64,
    /// Closed-form embedded eigenvalues of the well.
    pub predicted: Vec<f64>,
    /// Zeros of the signed growing coefficient found on the scan.
    pub detected: Vec<f64>,
    /// Certificates at the detected zeros.
    pub records: Vec<CertificateRecord>,
    pub scan: ScanReport,
}

/// Runs the certificate on the decoupled well, where embedded eigenvalues
/// exist, and locates them as sign changes of the growing coefficient at `-∞`
/// refined by bisection.
pub fn negative_control(
    mu: f64,
    depth: f64,
    scan_step: f64,
    op: &LinearizedOperator,
    opts: &CertifyOptions,
) -> Result<ControlReport> {
    let predicted = poschl_teller_embedded(mu, depth);
    if predicted.is_empty() {
        let need = {
            // (s)² >= 2μ  ⇔  d >= s(s + 1) with s = √(2μ)
            let s = (2.0 * mu).sqrt();
            s * (s + 1.0)
        };
        return Err(Error::Config(format!(
            "a well of depth {depth} has no eigenvalue in [mu, inf) for mu = {mu}; \
             use depth >= {need:.4}"
        )));
    }
    let top = predicted.iter().fold(mu, |m, l| m.max(*l)) + 1.0;
    let n = ((top - mu) / scan_step).ceil() as usize + 1;
    let grid = LambdaGrid::new(mu, mu + scan_step * (n - 1) as f64, n);
    let scan = scan_embedded(op, &grid, opts)?;
    let mut detected = Vec::new();
    let mut records = Vec::new();
    for w in scan.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(a.c_grow.is_finite() && b.c_grow.is_finite()) || a.c_grow.signum() == b.c_grow.signum()
        {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (a.lambda, b.lambda, a.c_grow);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = certify_lambda(op, mid, opts)?.c_grow;
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        records.push(certify_lambda(op, root, opts)?);
        detected.push(root);
    }
    Ok(ControlReport {
        mu,
        depth,
        predicted,
        detected,
        records,
        scan,
    })
}
