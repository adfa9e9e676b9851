//! The potential `V`, the matrix operator `ℋ = ℋ₀ + V`, the scalar operators
//! `L±`, and the discrete spectrum inside the gap.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;
use crate::ground_state::GroundState;
use crate::linalg::{BandLu, BandMatrix};
use crate::nonlinearity::Nonlinearity;

type PotentialFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// `V = [[a, b], [-b, -a]]`, sampled on a grid and evaluable anywhere.
#[derive(Clone)]
pub struct PotentialMatrix {
    pub grid: Grid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Fitted exponential decay rate of `|a| + |b|`, if the potential is not
    /// identically zero.
    pub tail_rate: Option<f64>,
    eval: Arc<PotentialFn>,
}

impl fmt::Debug for PotentialMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialMatrix")
            .field("grid", &self.grid)
            .field("tail_rate", &self.tail_rate)
            .finish_non_exhaustive()
    }
}

impl PotentialMatrix {
    /// `a = F(Q²) + F'(Q²)Q²`, `b = F'(Q²)Q²`.
    pub fn from_ground_state(gs: &GroundState, nl: &Nonlinearity) -> Result<Self> {
        let mut a = Vec::with_capacity(gs.q.len());
        let mut b = Vec::with_capacity(gs.q.len());
        for q in &gs.q {
            let s = q * q;
            let e = nl.eval(s)?;
            a.push(e.f + e.df * s);
            b.push(e.df * s);
        }
        let tail_rate = estimate_tail_rate(&gs.grid, &a, &b);
        let grid = gs.grid;
        let gs = gs.clone();
        let nl = nl.clone();
        let eval = move |x: f64| {
            let (q, _) = gs.eval(x);
            let s = q * q;
            match nl.eval(s) {
                Ok(e) => (e.f + e.df * s, e.df * s),
                Err(_) => (f64::NAN, f64::NAN),
            }
        };
        Ok(Self {
            grid,
            a,
            b,
            tail_rate,
            eval: Arc::new(eval),
        })
    }

    /// A potential given in closed form.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        let (a, b): (Vec<f64>, Vec<f64>) = grid.xs().into_iter().map(&f).unzip();
        let tail_rate = estimate_tail_rate(&grid, &a, &b);
        Self {
            grid,
            a,
            b,
            tail_rate,
            eval: Arc::new(f),
        }
    }

    pub fn zero(grid: Grid) -> Self {
        Self::from_fn(grid, |_| (0.0, 0.0))
    }

    /// The decoupled operator `ℋ₀ + diag(W, -W)`.
    pub fn decoupled<F>(grid: Grid, w: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(grid, move |x| (w(x), 0.0))
    }

    /// `(a(x), b(x))` at an arbitrary abscissa.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64) {
        (self.eval)(x)
    }

    /// Smallest `x >= 0` beyond which `max(|a|, |b|) <= eps` on the grid.
    pub fn negligible_from(&self, eps: f64) -> f64 {
        let n = self.grid.len();
        let mut last = None;
        for i in self.grid.center()..n {
            if self.a[i].abs().max(self.b[i].abs()) > eps {
                last = Some(i);
            }
        }
        match last {
            None => 0.0,
            Some(i) if i + 1 < n => self.grid.x(i + 1),
            Some(_) => self.grid.r(),
        }
    }

    /// Every `stride`-th sample, on the correspondingly coarser grid.
    pub fn restrict(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let half = self.grid.half / stride;
        let grid = Grid {
            h: self.grid.h * stride as f64,
            half,
        };
        let c = self.grid.center();
        let pick = |v: &[f64]| -> Vec<f64> {
            (0..grid.len())
                .map(|j| v[c + j * stride - half * stride])
                .collect()
        };
        Self {
            grid,
            a: pick(&self.a),
            b: pick(&self.b),
            tail_rate: self.tail_rate,
            eval: self.eval.clone(),
        }
    }

    /// `max_x (|a| + |b|)`.
    pub fn sup(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .fold(0.0, |m, (a, b)| f64::max(m, a.abs() + b.abs()))
    }
}

/// Least-squares slope of `-log(|a| + |b|)` over the part of `x > 0` where the
/// potential has fallen between `1e-4` and `1e-12` of its peak.
fn estimate_tail_rate(grid: &Grid, a: &[f64], b: &[f64]) -> Option<f64> {
    let peak = a
        .iter()
        .zip(b)
        .fold(0.0, |m, (a, b)| f64::max(m, a.abs() + b.abs()));
    if peak == 0.0 {
        return None;
    }
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in grid.center()..grid.len() {
        let v = (a[i].abs() + b[i].abs()) / peak;
        if (1e-12..=1e-4).contains(&v) {
            let (x, y) = (grid.x(i), v.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    if n < 10.0 {
        return None;
    }
    let den = n * sxx - sx * sx;
    if den <= 0.0 {
        return None;
    }
    Some(-(n * sxy - sx * sy) / den)
}

/// A pair of grid functions `(f, g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField2 {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl GridField2 {
    pub fn new(f: Vec<f64>, g: Vec<f64>) -> Self {
        Self { f, g }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `S(f, g) = (g, f)`.
    pub fn swapped(&self) -> Self {
        Self::new(self.g.clone(), self.f.clone())
    }

    pub fn norm(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.g)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Interleaved layout `[f₀, g₀, f₁, g₁, …]`.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.f
            .iter()
            .zip(&self.g)
            .flat_map(|(f, g)| [*f, *g])
            .collect()
    }

    pub fn from_interleaved(v: &[f64]) -> Self {
        let (f, g) = v.chunks_exact(2).map(|c| (c[0], c[1])).unzip();
        Self { f, g }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Second,
    Fourth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LSign {
    Plus,
    Minus,
}

/// Finite-difference discretization of `ℋ` with homogeneous Dirichlet walls just
/// outside the grid.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    pub mu: f64,
    pub potential: PotentialMatrix,
    pub stencil: Stencil,
}

impl LinearizedOperator {
    pub fn new(mu: f64, potential: PotentialMatrix) -> Self {
        Self {
            mu,
            potential,
            stencil: Stencil::Second,
        }
    }

    pub fn from_ground_state(gs: &GroundState, nl: &Nonlinearity) -> Result<Self> {
        Ok(Self::new(
            gs.mu,
            PotentialMatrix::from_ground_state(gs, nl)?,
        ))
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.potential.grid
    }

    /// `μ + max(|a| + |b|)`, the scale against which residuals are measured.
    pub fn scale(&self) -> f64 {
        self.mu + self.potential.sup()
    }

    fn weights(&self) -> &'static [f64] {
        match self.stencil {
            Stencil::Second => &[-2.0, 1.0],
            Stencil::Fourth => &[-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        }
    }

    /// `f''` with zero ghost values.
    fn second_difference(&self, f: &[f64]) -> Vec<f64> {
        let w = self.weights();
        let n = f.len();
        let inv = 1.0 / (self.grid().h * self.grid().h);
        let at = |i: isize| -> f64 {
            if i < 0 || i >= n as isize {
                0.0
            } else {
                f[i as usize]
            }
        };
        (0..n as isize)
            .map(|i| {
                let mut s = w[0] * f[i as usize];
                for (k, wk) in w.iter().enumerate().skip(1) {
                    let k = k as isize;
                    s += wk * (at(i - k) + at(i + k));
                }
                s * inv
            })
            .collect()
    }

    /// `ℋw = (f'' - μf + af + bg, -(g'' - μg + ag + bf))`.
    ///
    /// The second row is evaluated as the negation of the first row's formula
    /// with the roles of `f` and `g` exchanged, so `ℋSw = -Sℋw` holds bit for bit.
    pub fn apply_h(&self, w: &GridField2) -> Result<GridField2> {
        let grid = self.grid();
        grid.check(w.f.len())?;
        grid.check(w.g.len())?;
        let (a, b) = (&self.potential.a, &self.potential.b);
        let row = |p: &[f64], q: &[f64]| -> Vec<f64> {
            let d2 = self.second_difference(p);
            (0..p.len())
                .map(|i| d2[i] - self.mu * p[i] + a[i] * p[i] + b[i] * q[i])
                .collect()
        };
        let f = row(&w.f, &w.g);
        let g = row(&w.g, &w.f).into_iter().map(|v| -v).collect();
        Ok(GridField2 { f, g })
    }

    /// `L₋f = -f'' + μf - F(Q²)f` and `L₊f = L₋f - 2F'(Q²)Q²f`, using
    /// `F(Q²) = a - b` and `F(Q²) + 2F'(Q²)Q² = a + b`.
    pub fn apply_l(&self, sign: LSign, f: &[f64]) -> Result<Vec<f64>> {
        self.grid().check(f.len())?;
        let (a, b) = (&self.potential.a, &self.potential.b);
        let d2 = self.second_difference(f);
        Ok((0..f.len())
            .map(|i| {
                let w = match sign {
                    LSign::Minus => a[i] - b[i],
                    LSign::Plus => a[i] + b[i],
                };
                -d2[i] + self.mu * f[i] - w * f[i]
            })
            .collect())
    }

    fn l_diagonal(&self, sign: LSign) -> Vec<f64> {
        let (a, b) = (&self.potential.a, &self.potential.b);
        let h2 = self.grid().h * self.grid().h;
        let w0 = self.weights()[0];
        (0..a.len())
            .map(|i| {
                let w = match sign {
                    LSign::Minus => a[i] - b[i],
                    LSign::Plus => a[i] + b[i],
                };
                -w0 / h2 + self.mu - w
            })
            .collect()
    }

    /// Dense matrix of `L±`.
    fn l_dense(&self, sign: LSign) -> DMatrix<f64> {
        let n = self.grid().len();
        let h2 = self.grid().h * self.grid().h;
        let diag = self.l_diagonal(sign);
        let w = self.weights();
        DMatrix::from_fn(n, n, |i, j| {
            let k = i.abs_diff(j);
            if k == 0 {
                diag[i]
            } else if k < w.len() {
                -w[k] / h2
            } else {
                0.0
            }
        })
    }

    /// Band LU of `ℋ - σ` in the interleaved layout.
    fn shifted_lu(&self, sigma: f64) -> Result<BandLu> {
        let n = self.grid().len();
        let h2 = self.grid().h * self.grid().h;
        let w = self.weights();
        let reach = 2 * (w.len() - 1);
        let mut m = BandMatrix::zeros(2 * n, reach, reach);
        let (a, b) = (&self.potential.a, &self.potential.b);
        for i in 0..n {
            let (fi, gi) = (2 * i, 2 * i + 1);
            m.set(fi, fi, w[0] / h2 - self.mu + a[i] - sigma);
            m.set(fi, gi, b[i]);
            m.set(gi, gi, -(w[0] / h2 - self.mu + a[i]) - sigma);
            m.set(gi, fi, -b[i]);
            for (k, wk) in w.iter().enumerate().skip(1) {
                for j in [i.wrapping_sub(k), i + k] {
                    if j < n {
                        m.set(fi, 2 * j, wk / h2);
                        m.set(gi, 2 * j + 1, -wk / h2);
                    }
                }
            }
        }
        m.factor()
    }

    /// Eigenvalues of the discretized `ℋ` off the essential spectrum, with
    /// eigenvectors on the full grid.
    ///
    /// A dense survey of `L₋L₊` (whose eigenvalues are `λ²`) on a subsampled grid
    /// locates the candidates; each cluster is then refined on the full grid by
    /// shift-and-invert subspace iteration in the even and odd sectors
    /// separately, followed by Rayleigh–Ritz.
    pub fn discrete_eigenvalues(&self, opts: &EigenOptions) -> Result<Spectrum> {
        let mu = self.mu;
        let eps = opts.window_eps * mu;
        let window = (-mu + eps, mu - eps);
        let fine_half = self.grid().half;
        let stride = fine_half.div_ceil(opts.dense_max / 2).max(1);
        let coarse = LinearizedOperator {
            mu,
            potential: self.potential.restrict(stride),
            stencil: self.stencil,
        };

        let lm = coarse.l_dense(LSign::Minus);
        let lp = coarse.l_dense(LSign::Plus);
        let nus = (&lm * &lp).complex_eigenvalues();
        let mut survey: Vec<Complex<f64>> = Vec::with_capacity(2 * nus.len());
        for nu in nus.iter() {
            let l = nu.sqrt();
            survey.push(l);
            survey.push(-l);
        }

        let inside = |z: &Complex<f64>| z.re.abs() < window.1 && z.im.abs() < mu;
        let mut gap: Vec<Complex<f64>> = survey.iter().copied().filter(inside).collect();
        gap.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        let tol = opts.cluster_radius * mu;
        let mut clusters: Vec<Vec<Complex<f64>>> = Vec::new();
        for z in gap {
            match clusters.last_mut() {
                Some(c) if (z.re - c.last().unwrap().re).abs() <= tol => c.push(z),
                _ => clusters.push(vec![z]),
            }
        }

        let mut eigenpairs = Vec::new();
        let mut summaries = Vec::new();
        let mut discarded = 0;
        for c in &clusters {
            let center = c.iter().map(|z| z.re).sum::<f64>() / c.len() as f64;
            let radius = c
                .iter()
                .map(|z| (z - Complex::new(center, 0.0)).norm())
                .fold(0.0, f64::max)
                + tol;
            let lu = self.shifted_lu(center)?;
            let before = eigenpairs.len();
            for parity in [Parity::Even, Parity::Odd] {
                let p = c.len() + 1;
                let pairs = self.sector_iteration(&lu, parity, p, opts)?;
                for pair in pairs {
                    let z = Complex::new(pair.re, pair.im);
                    if (z - Complex::new(center, 0.0)).norm() > radius || pair.re.abs() >= window.1
                    {
                        continue;
                    }
                    if wall_fraction(&pair.vector, opts.wall_cells) > opts.wall_mass {
                        discarded += 1;
                        continue;
                    }
                    eigenpairs.push(pair);
                }
            }
            summaries.push(ClusterSummary {
                center,
                survey_size: c.len(),
                refined: eigenpairs.len() - before,
            });
        }
        eigenpairs.sort_by(|p, q| {
            p.re.total_cmp(&q.re)
                .then(p.im.total_cmp(&q.im))
                .then((p.parity as u8).cmp(&(q.parity as u8)))
        });

        let essential_localized = coarse.localized_essential(&survey, opts)?;

        Ok(Spectrum {
            mu,
            window,
            survey_points: coarse.grid().len(),
            clusters: summaries,
            eigenpairs,
            discarded_wall_modes: discarded,
            essential_localized,
        })
    }

    /// Subspace iteration with `(ℋ - σ)⁻¹` restricted to one parity sector.
    fn sector_iteration(
        &self,
        lu: &BandLu,
        parity: Parity,
        p: usize,
        opts: &EigenOptions,
    ) -> Result<Vec<Eigenpair>> {
        let n = self.grid().len();
        let mut x: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let mut v: Vec<f64> = (0..2 * n)
                    .map(|i| {
                        let t = (i / 2) as f64 / n as f64;
                        ((j + 1) as f64 * 7.1 * t + (i % 2) as f64 * 0.9 + j as f64).sin()
                    })
                    .collect();
                project_parity(&mut v, parity);
                v
            })
            .collect();
        orthonormalize(&mut x);
        let mut prev: Vec<Complex<f64>> = Vec::new();
        for _ in 0..opts.max_iterations {
            for v in x.iter_mut() {
                lu.solve(v);
                project_parity(v, parity);
            }
            orthonormalize(&mut x);
            let theta = self.ritz(&x)?.0;
            let done = prev.len() == theta.len()
                && theta
                    .iter()
                    .zip(&prev)
                    .all(|(a, b)| (a - b).norm() <= opts.ritz_tol * (1.0 + a.norm()));
            prev = theta;
            if done {
                break;
            }
        }
        let (theta, hp, hx) = self.ritz(&x)?;
        let mut pairs = Vec::new();
        for t in theta {
            let z = null_vector(&hp, t);
            let y: Vec<Complex<f64>> = (0..2 * n)
                .map(|i| x.iter().zip(z.iter()).map(|(xk, zk)| zk * xk[i]).sum())
                .collect();
            let hy: Vec<Complex<f64>> = (0..2 * n)
                .map(|i| hx.iter().zip(z.iter()).map(|(hk, zk)| zk * hk[i]).sum())
                .collect();
            let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let res = y
                .iter()
                .zip(&hy)
                .map(|(y, hy)| (hy - t * y).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / ny;
            // rotate so the dominant entry is real and positive
            let k = (0..2 * n)
                .max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm()))
                .unwrap_or(0);
            let phase = y[k].conj() / y[k].norm();
            let re: Vec<f64> = y.iter().map(|v| (v * phase).re / ny).collect();
            let imag = (t.im != 0.0).then(|| {
                let im: Vec<f64> = y.iter().map(|v| (v * phase).im / ny).collect();
                GridField2::from_interleaved(&im)
            });
            pairs.push(Eigenpair {
                re: t.re,
                im: t.im,
                residual: res,
                parity,
                vector: GridField2::from_interleaved(&re),
                imag,
            });
        }
        Ok(pairs)
    }

    /// Ritz values, the projected matrix and `ℋX` for an orthonormal block.
    #[allow(clippy::type_complexity)]
    fn ritz(&self, x: &[Vec<f64>]) -> Result<(Vec<Complex<f64>>, DMatrix<f64>, Vec<Vec<f64>>)> {
        let hx: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                self.apply_h(&GridField2::from_interleaved(v))
                    .map(|w| w.to_interleaved())
            })
            .collect::<Result<_>>()?;
        let p = x.len();
        let hp = DMatrix::from_fn(p, p, |i, j| dot(&x[i], &hx[j]));
        let theta = hp.complex_eigenvalues().iter().copied().collect();
        Ok((theta, hp, hx))
    }

    /// Real survey eigenvalues with `|λ| >= μ` whose eigenvectors stay away from
    /// the walls.
    fn localized_essential(
        &self,
        survey: &[Complex<f64>],
        opts: &EigenOptions,
    ) -> Result<Vec<f64>> {
        let mu = self.mu;
        let n = self.grid().len();
        let r = self.grid().r();
        let mut found = Vec::new();
        for z in survey {
            if z.re.abs() < mu || z.im.abs() > 1e-8 * (1.0 + z.re.abs()) {
                continue;
            }
            let sigma = z.re * (1.0 + 1e-10) + 1e-12;
            let lu = self.shifted_lu(sigma)?;
            let mut v: Vec<f64> = (0..2 * n).map(|i| 1.0 + 0.01 * (i as f64).sin()).collect();
            for _ in 0..3 {
                lu.solve(&mut v);
                let s = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|e| *e /= s);
            }
            let outer: f64 = (0..n)
                .filter(|&i| self.grid().x(i).abs() > 0.5 * r)
                .map(|i| v[2 * i].powi(2) + v[2 * i + 1].powi(2))
                .sum();
            if outer < opts.localization_mass {
                found.push(z.re);
            }
        }
        found.sort_by(f64::total_cmp);
        Ok(found)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two passes of modified Gram–Schmidt.
fn orthonormalize(x: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for j in 0..x.len() {
            for k in 0..j {
                let (head, tail) = x.split_at_mut(j);
                let c = dot(&head[k], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(&head[k]) {
                    *t -= c * h;
                }
            }
            let s = dot(&x[j], &x[j]).sqrt();
            if s > 0.0 {
                x[j].iter_mut().for_each(|e| *e /= s);
            }
        }
    }
}

/// Symmetrizes an interleaved vector about the grid center.
fn project_parity(v: &mut [f64], parity: Parity) {
    let n = v.len() / 2;
    let sign = match parity {
        Parity::Even => 1.0,
        _ => -1.0,
    };
    for i in 0..n / 2 + 1 {
        let j = n - 1 - i;
        for c in 0..2 {
            let (p, q) = (v[2 * i + c], v[2 * j + c]);
            let m = 0.5 * (p + sign * q);
            v[2 * i + c] = m;
            v[2 * j + c] = sign * m;
        }
    }
}

/// Unit vector spanning the (numerical) null space of `A - θ`.
fn null_vector(a: &DMatrix<f64>, theta: Complex<f64>) -> DVector<Complex<f64>> {
    let p = a.nrows();
    let m = DMatrix::from_fn(p, p, |i, j| {
        Complex::new(a[(i, j)], 0.0)
            - if i == j {
                theta
            } else {
                Complex::new(0.0, 0.0)
            }
    });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let k = (0..p)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap_or(0);
    DVector::from_fn(p, |j, _| v_t[(k, j)].conj())
}

/// Share of the squared norm carried by the `cells` samples next to each wall.
fn wall_fraction(w: &GridField2, cells: usize) -> f64 {
    let n = w.len();
    let total = w.norm().powi(2);
    if total == 0.0 {
        return 0.0;
    }
    let near: f64 = (0..n)
        .filter(|&i| i < cells || i + cells >= n)
        .map(|i| w.f[i] * w.f[i] + w.g[i] * w.g[i])
        .sum();
    near / total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Parity of a field on a symmetric grid, up to a relative tolerance.
pub fn parity_of(w: &GridField2, tol: f64) -> Parity {
    let n = w.len();
    let scale = w.norm();
    if scale == 0.0 {
        return Parity::Even;
    }
    let (mut even, mut odd) = (0.0, 0.0);
    for i in 0..n {
        let j = n - 1 - i;
        for (p, q) in [(w.f[i], w.f[j]), (w.g[i], w.g[j])] {
            even += (p - q).powi(2);
            odd += (p + q).powi(2);
        }
    }
    if even.sqrt() <= tol * scale {
        Parity::Even
    } else if odd.sqrt() <= tol * scale {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Relative half-gap `ε/μ` excluded at each end of `(-μ, μ)`.
    pub window_eps: f64,
    /// Largest grid used for the dense survey.
    pub dense_max: usize,
    /// Survey eigenvalues closer than `cluster_radius · μ` are refined together.
    pub cluster_radius: f64,
    pub max_iterations: usize,
    pub ritz_tol: f64,
    pub wall_cells: usize,
    pub wall_mass: f64,
    /// Mass fraction in `|x| > R/2` below which a mode counts as localized.
    pub localization_mass: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            window_eps: 1e-3,
            dense_max: 801,
            cluster_radius: 0.05,
            max_iterations: 60,
            ritz_tol: 1e-12,
            wall_cells: 2,
            wall_mass: 0.01,
            localization_mass: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigenpair {
    pub re: f64,
    pub im: f64,
    /// `‖(ℋ - λ)w‖ / ‖w‖`.
    pub residual: f64,
    pub parity: Parity,
    /// Real part of the eigenvector, phased so its largest entry is real.
    #[serde(skip)]
    pub vector: GridField2,
    /// Imaginary part, for non-real eigenvalues.
    #[serde(skip)]
    pub imag: Option<GridField2>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub center: f64,
    pub survey_size: usize,
    /// Eigenpairs kept after refinement.
    pub refined: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub mu: f64,
    pub window: (f64, f64),
    pub survey_points: usize,
    pub clusters: Vec<ClusterSummary>,
    pub eigenpairs: Vec<Eigenpair>,
    pub discarded_wall_modes: usize,
    /// Real eigenvalues with `|λ| >= μ` whose eigenvectors are localized; empty
    /// when no embedded eigenvalue is visible at survey resolution.
    pub essential_localized: Vec<f64>,
}

impl Default for GridField2 {
    fn default() -> Self {
        Self::zeros(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_state::{solve_ground_state, GroundStateParams};

    fn cubic(h: f64) -> (GroundState, Nonlinearity) {
        let nl = Nonlinearity::cubic();
        let gs = solve_ground_state(&nl, &GroundStateParams::new(1.0).with_grid(30.0, h)).unwrap();
        (gs, nl)
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

    #[test]
    fn potential_at_the_origin() {
        let (gs, nl) = cubic(1e-3);
        let v = PotentialMatrix::from_ground_state(&gs, &nl).unwrap();
        let c = gs.grid.center();
        assert!((v.a[c] - 4.0).abs() < 1e-8);
        assert!((v.b[c] - 2.0).abs() < 1e-8);
        let (a, b) = v.eval(0.0);
        assert!((a - 4.0).abs() < 1e-8 && (b - 2.0).abs() < 1e-8);
        let rate = v.tail_rate.unwrap();
        assert!(rate >= 2.0 - 1e-3, "{rate}");
    }

    #[test]
    fn kernel_vectors_converge_at_second_order() {
        let (r1, r2, scale) = kernel_residuals(2e-3);
        let (s1, s2, _) = kernel_residuals(1e-3);
        eprintln!(
            "{r1:e} {r2:e} -> {s1:e} {s2:e}, ratios {} {}",
            r1 / s1,
            r2 / s2
        );
        assert!(s1 <= 5.0 * 1e-6 * scale && s2 <= 5.0 * 1e-6 * scale);
        assert!((r1 / s1 - 4.0).abs() < 0.4 && (r2 / s2 - 4.0).abs() < 0.4);
    }

    #[test]
    fn reflection_is_exact() {
        let (gs, nl) = cubic(1e-2);
        for stencil in [Stencil::Second, Stencil::Fourth] {
            let op = LinearizedOperator::from_ground_state(&gs, &nl)
                .unwrap()
                .with_stencil(stencil);
            let n = gs.grid.len();
            let w = GridField2::new(
                (0..n).map(|i| (i as f64 * 0.013).sin()).collect(),
                (0..n).map(|i| (i as f64 * 0.007).cos() * 1e-3).collect(),
            );
            let lhs = op.apply_h(&w.swapped()).unwrap();
            let hw = op.apply_h(&w).unwrap();
            let rhs = GridField2::new(
                hw.g.iter().map(|v| -v).collect(),
                hw.f.iter().map(|v| -v).collect(),
            );
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn scalar_operators_annihilate_the_kernel() {
        let (gs, nl) = cubic(1e-3);
        let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
        let m = op.apply_l(LSign::Minus, &gs.q).unwrap();
        let p = op.apply_l(LSign::Plus, &gs.qp).unwrap();
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(sup(&m) < 1e-5, "{}", sup(&m));
        assert!(sup(&p) < 1e-5, "{}", sup(&p));
        assert!(op.apply_l(LSign::Plus, &[0.0; 3]).is_err());
    }

    #[test]
    fn rows_combine_into_scalar_operators() {
        let (gs, nl) = cubic(1e-2);
        let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
        let n = gs.grid.len();
        let w = GridField2::new(
            (0..n).map(|i| (i as f64 * 0.31).sin()).collect(),
            (0..n).map(|i| (i as f64 * 0.17).cos()).collect(),
        );
        let u: Vec<f64> = (0..n).map(|i| w.f[i] + w.g[i]).collect();
        let v: Vec<f64> = (0..n).map(|i| w.f[i] - w.g[i]).collect();
        let hw = op.apply_h(&w).unwrap();
        let lm = op.apply_l(LSign::Minus, &v).unwrap();
        let lp = op.apply_l(LSign::Plus, &u).unwrap();
        for i in 0..n {
            let sum = hw.f[i] + hw.g[i];
            let diff = hw.f[i] - hw.g[i];
            let tol = 1e-9 * (1.0 + lm[i].abs() + lp[i].abs());
            assert!((sum + lm[i]).abs() < tol, "{i}");
            assert!((diff + lp[i]).abs() < tol, "{i}");
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let (gs, nl) = cubic(1e-2);
        let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
        let err = op.apply_h(&GridField2::zeros(5)).unwrap_err();
        assert!(matches!(err, crate::error::Error::GridMismatch { .. }));
    }

    /// Distance of `w` from the span of `basis`, relative to `‖w‖`.
    fn distance_to_span(w: &GridField2, basis: &[&GridField2]) -> f64 {
        let mut q: Vec<Vec<f64>> = basis.iter().map(|b| b.to_interleaved()).collect();
        orthonormalize(&mut q);
        let mut r = w.to_interleaved();
        for qk in &q {
            let c = dot(qk, &r);
            r.iter_mut().zip(qk).for_each(|(a, b)| *a -= c * b);
        }
        dot(&r, &r).sqrt() / w.norm()
    }

    #[test]
    fn cubic_spectrum_is_the_kernel() {
        let (gs, nl) = cubic(1e-3);
        let op = LinearizedOperator::from_ground_state(&gs, &nl).unwrap();
        let spec = op.discrete_eigenvalues(&EigenOptions::default()).unwrap();
        assert_eq!(spec.eigenpairs.len(), 4);
        assert!(spec.essential_localized.is_empty());
        let h2 = gs.grid.h * gs.grid.h;
        for p in &spec.eigenpairs {
            assert!(p.re.hypot(p.im) < 1e-2);
            assert!(p.residual <= h2 * op.scale(), "{}", p.residual);
            // λ ↦ -λ and λ ↦ λ̄ both preserve the spectrum
            assert!(spec
                .eigenpairs
                .iter()
                .any(|q| (q.re + p.re).abs() < 1e-8 && (q.im.abs() - p.im.abs()).abs() < 1e-8));
        }
        let even: Vec<&GridField2> = spec
            .eigenpairs
            .iter()
            .filter(|p| p.parity == Parity::Even)
            .flat_map(|p| std::iter::once(&p.vector).chain(p.imag.as_ref()))
            .collect();
        let odd: Vec<&GridField2> = spec
            .eigenpairs
            .iter()
            .filter(|p| p.parity == Parity::Odd)
            .flat_map(|p| std::iter::once(&p.vector).chain(p.imag.as_ref()))
            .collect();
        let neg: Vec<f64> = gs.q.iter().map(|v| -v).collect();
        let d1 = distance_to_span(&GridField2::new(gs.q.clone(), neg), &even);
        let d2 = distance_to_span(&GridField2::new(gs.qp.clone(), gs.qp.clone()), &odd);
        assert!(d1 < 1e-3 && d2 < 1e-3, "{d1:e} {d2:e}");
        for p in &spec.eigenpairs {
            assert_eq!(parity_of(&p.vector, 1e-8), p.parity);
        }
    }
}
