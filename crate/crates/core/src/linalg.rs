//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// LU factors of an `n × n` band matrix with `kl` sub- and `ku` super-diagonals,
/// stored LAPACK-style with room for the `kl` extra super-diagonals created by
/// row interchanges.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

/// Builder for a band matrix; entries outside the band are rejected.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ab: vec![0.0; ld * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let ld = 2 * self.kl + self.ku + 1;
        (self.kl + self.ku + i - j) + j * ld
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i < self.n && j < self.n && j + self.kl >= i && i + self.ku >= j,
            "({i}, {j}) outside the band"
        );
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i < self.n && j < self.n && j + self.kl >= i && i + self.ku >= j,
            "({i}, {j}) outside the band"
        );
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn factor(self) -> Result<BandLu> {
        let Self { n, kl, ku, mut ab } = self;
        let ld = 2 * kl + ku + 1;
        let at = |i: usize, j: usize| (kl + ku + i - j) + j * ld;
        let scale = ab.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let jmax = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = ab[at(k, k)].abs();
            for i in k + 1..=last {
                let v = ab[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 {
                if scale == 0.0 {
                    return Err(Error::Eigensolver("zero matrix".into()));
                }
                // exactly singular: perturb the pivot at round-off level
                ab[at(k, k)] = f64::EPSILON * scale;
            }
            if p != k {
                for j in k..=jmax {
                    ab.swap(at(k, j), at(p, j));
                }
            }
            let d = ab[at(k, k)];
            for i in k + 1..=last {
                let l = ab[at(i, k)] / d;
                ab[at(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        ab[at(i, j)] -= l * ab[at(k, j)];
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, ab, piv })
    }
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ld = 2 * kl + ku + 1;
        let at = |i: usize, j: usize| (kl + ku + i - j) + j * ld;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.ab[at(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.ab[at(k, j)] * b[j];
            }
            b[k] = s / self.ab[at(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let n = 40;
        let (kl, ku) = (2, 3);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces pivoting
                let v = if i == j {
                    1e-3 * (i as f64 + 1.0).sin()
                } else {
                    ((i * 7 + j * 3) as f64).cos()
                };
                band.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let lu = band.factor().unwrap();
        let mut x = rhs.clone();
        lu.solve(&mut x);
        let expect = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!(
                (x[i] - expect[i]).abs() < 1e-9 * (1.0 + expect[i].abs()),
                "{i}"
            );
        }
    }

    #[test]
    #[should_panic]
    fn rejects_entries_outside_band() {
        BandMatrix::zeros(5, 1, 1).set(0, 3, 1.0);
    }
}
