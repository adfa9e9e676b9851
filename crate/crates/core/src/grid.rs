//! Uniform symmetric grids and the quadrature / differentiation rules used on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `x_i = (i - half) h`, `i = 0..=2 half`, covering `[-R, R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub h: f64,
    pub half: usize,
}

impl Grid {
    /// Largest symmetric grid with spacing `h` inside `[-r, r]`.
    pub fn symmetric(r: f64, h: f64) -> Result<Self> {
        if !(r > 0.0 && h > 0.0 && r.is_finite() && h.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "grid needs R > 0 and h > 0 (got R = {r}, h = {h})"
            )));
        }
        let half = (r / h + 1e-9).floor() as usize;
        if half < 4 {
            return Err(Error::InvalidParameters(format!(
                "grid too coarse: R / h = {}",
                r / h
            )));
        }
        Ok(Self { h, half })
    }

    #[inline]
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn center(&self) -> usize {
        self.half
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.h
    }

    /// Half-width of the grid.
    #[inline]
    pub fn r(&self) -> f64 {
        self.half as f64 * self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let t = (x / self.h).round() + self.half as f64;
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// First index whose abscissa is `>= x` (up to rounding), clamped.
    pub fn ceil_index(&self, x: f64) -> usize {
        let t = (x / self.h - 1e-9).ceil() + self.half as f64;
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Last index whose abscissa is `<= x` (up to rounding), clamped.
    pub fn floor_index(&self, x: f64) -> usize {
        let t = (x / self.h + 1e-9).floor() + self.half as f64;
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.len(),
                got: n,
            })
        }
    }
}

/// `out[i] = ∫_{x_i}^{x_last} f` on a uniform grid.
///
/// Each cell uses the four-point rule `h/24 (-f₋₁ + 13f₀ + 13f₁ - f₂)` (fourth
/// order); the end cells fall back to the three-point rule.
pub fn cumulative_from_right(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + cell_integral(f, i, h);
    }
    out
}

/// Integral over the cell `[x_i, x_{i+1}]`.
fn cell_integral(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len();
    if n == 2 {
        return 0.5 * h * (f[0] + f[1]);
    }
    if i >= 1 && i + 2 < n {
        h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
    } else if i == 0 {
        h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
    } else {
        h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1])
    }
}

/// Trapezoid integral of samples.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1])),
    }
}

/// Five-point centered first derivative at interior index `i` (needs `2 <= i < n-2`).
#[inline]
pub fn d1_five_point(f: &[f64], i: usize, h: f64) -> f64 {
    (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
}

/// Cubic Hermite interpolation on a uniform grid given values and slopes.
pub fn hermite(grid: &Grid, y: &[f64], dy: &[f64], x: f64) -> (f64, f64) {
    let h = grid.h;
    let t_all = x / h + grid.half as f64;
    let last = grid.len() - 1;
    let i = (t_all.floor().max(0.0) as usize).min(last - 1);
    let t = t_all - i as f64;
    let (y0, y1, d0, d1) = (y[i], y[i + 1], dy[i] * h, dy[i + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let val = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * d1;
    let der = ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * d1)
        / h;
    (val, der)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = Grid::symmetric(3.0, 0.5).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g.x(0), -3.0);
        assert_eq!(g.x(12), 3.0);
        assert_eq!(g.x(g.center()), 0.0);
        assert_eq!(g.nearest(1.1), 8);
        assert_eq!(g.ceil_index(1.0), 8);
        assert_eq!(g.floor_index(0.9), 7);
        assert!(Grid::symmetric(-1.0, 0.1).is_err());
    }

    #[test]
    fn cumulative_integral_of_exponential() {
        let g = Grid::symmetric(5.0, 0.01).unwrap();
        let f: Vec<f64> = g.xs().iter().map(|x| (-x).exp()).collect();
        let c = cumulative_from_right(&f, g.h);
        for i in (0..g.len()).step_by(37) {
            let x = g.x(i);
            let exact = (-x).exp() - (-5.0f64).exp();
            assert!((c[i] - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |h: f64| {
            let g = Grid::symmetric(2.0, h).unwrap();
            let f: Vec<f64> = g.xs().iter().map(|x| x.exp()).collect();
            let c = cumulative_from_right(&f, h);
            (c[0] - (2.0f64.exp() - (-2.0f64).exp())).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 10.0, "ratio {ratio}");
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let y: Vec<f64> = g.xs().iter().map(|x| x * x * x - x).collect();
        let dy: Vec<f64> = g.xs().iter().map(|x| 3.0 * x * x - 1.0).collect();
        for x in [-1.9, -0.3, 0.0, 0.77, 1.99] {
            let (v, d) = hermite(&g, &y, &dy, x);
            assert!((v - (x * x * x - x)).abs() < 1e-12);
            assert!((d - (3.0 * x * x - 1.0)).abs() < 1e-11);
        }
    }
}
