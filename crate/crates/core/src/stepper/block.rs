//! Block-tridiagonal systems with 3×3 blocks, solved by block Thomas elimination.

use crate::coeffs::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One η-column of the implicit system.
///
/// Row `j` reads `lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]`.
/// Row 0 may also couple to `x[2]` through `wall`, which carries the one-sided
/// Neumann stencil at the wall.
#[derive(Clone, Debug)]
pub struct BlockTridiag<T> {
    pub lower: Vec<Mat3<T>>,
    pub diag: Vec<Mat3<T>>,
    pub upper: Vec<Mat3<T>>,
    pub wall: Mat3<T>,
    pub rhs: Vec<Vec3<T>>,
}

impl<T: Real> BlockTridiag<T> {
    pub fn new(n: usize) -> Self {
        BlockTridiag {
            lower: vec![Mat3::zero(); n],
            diag: vec![Mat3::identity(); n],
            upper: vec![Mat3::zero(); n],
            wall: Mat3::zero(),
            rhs: vec![Vec3::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves the system; `column` only labels errors.
    pub fn solve(&self, column: usize) -> Result<Vec<Vec3<T>>> {
        let n = self.len();
        if n < 3 {
            return Err(Error::Sizing(format!("block system with {n} rows")));
        }
        let inv = |m: Mat3<T>, row: usize| m.inverse().ok_or(Error::SingularBlock { column, row });

        // c[j] = D'^{-1} U[j], d[j] = D'^{-1} r'[j]
        let mut c = vec![Mat3::zero(); n];
        let mut d = vec![Vec3::zero(); n];

        let d0 = inv(self.diag[0], 0)?;
        c[0] = d0 * self.upper[0];
        let w0 = d0 * self.wall;
        d[0] = d0 * self.rhs[0];

        // row 1 absorbs the extra coupling of row 0 to x[2]
        let l1 = self.lower[1];
        let diag1 = self.diag[1] - l1 * c[0];
        let upper1 = self.upper[1] - l1 * w0;
        let inv1 = inv(diag1, 1)?;
        c[1] = inv1 * upper1;
        d[1] = inv1 * (self.rhs[1] - l1 * d[0]);

        for j in 2..n {
            let l = self.lower[j];
            let dj = inv(self.diag[j] - l * c[j - 1], j)?;
            c[j] = dj * self.upper[j];
            d[j] = dj * (self.rhs[j] - l * d[j - 1]);
        }

        let mut x = vec![Vec3::zero(); n];
        x[n - 1] = d[n - 1];
        for j in (1..n - 1).rev() {
            x[j] = d[j] - c[j] * x[j + 1];
        }
        x[0] = d[0] - c[0] * x[1] - w0 * x[2];
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination with partial pivoting, as an independent oracle.
    fn dense_solve(sys: &BlockTridiag<f64>) -> Vec<Vec3<f64>> {
        let n = sys.len();
        let m = 3 * n;
        let mut a = vec![vec![0.0; m + 1]; m];
        let mut put = |row: usize, col: usize, blk: &Mat3<f64>| {
            for r in 0..3 {
                for c in 0..3 {
                    a[3 * row + r][3 * col + c] += blk[(r, c)];
                }
            }
        };
        for j in 0..n {
            put(j, j, &sys.diag[j]);
            if j > 0 {
                put(j, j - 1, &sys.lower[j]);
            }
            if j + 1 < n {
                put(j, j + 1, &sys.upper[j]);
            }
        }
        put(0, 2, &sys.wall);
        for j in 0..n {
            for r in 0..3 {
                a[3 * j + r][m] = sys.rhs[j][r];
            }
        }
        for k in 0..m {
            let p = (k..m).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
            a.swap(k, p);
            for r in k + 1..m {
                let f = a[r][k] / a[k][k];
                for c in k..=m {
                    a[r][c] -= f * a[k][c];
                }
            }
        }
        let mut x = vec![0.0; m];
        for k in (0..m).rev() {
            let s: f64 = (k + 1..m).map(|c| a[k][c] * x[c]).sum();
            x[k] = (a[k][m] - s) / a[k][k];
        }
        (0..n).map(|j| Vec3([x[3 * j], x[3 * j + 1], x[3 * j + 2]])).collect()
    }

    fn pseudo(k: usize) -> f64 {
        ((k as f64 * 12.9898).sin() * 43758.5453).fract()
    }

    #[test]
    fn matches_dense_solve() {
        let n = 8;
        let mut sys = BlockTridiag::<f64>::new(n);
        let mut k = 0;
        let mut next = || {
            k += 1;
            pseudo(k)
        };
        for j in 1..n - 1 {
            for r in 0..3 {
                for c in 0..3 {
                    sys.lower[j][(r, c)] = 0.3 * next();
                    sys.upper[j][(r, c)] = 0.3 * next();
                    sys.diag[j][(r, c)] = 0.2 * next() + if r == c { 3.0 } else { 0.0 };
                }
            }
        }
        sys.diag[0] = Mat3::diag(1.0, 1.0, -3.0);
        sys.upper[0] = Mat3::diag(0.0, 0.0, 4.0);
        sys.wall = Mat3::diag(0.0, 0.0, -1.0);
        for j in 0..n {
            sys.rhs[j] = Vec3([next(), next(), next()]);
        }
        let x = sys.solve(0).unwrap();
        let y = dense_solve(&sys);
        for j in 0..n {
            assert!((x[j] - y[j]).max_abs() < 1e-12, "row {j}");
        }
    }

    #[test]
    fn singular_block_is_reported() {
        let mut sys = BlockTridiag::<f64>::new(5);
        sys.diag[3] = Mat3::zero();
        assert!(matches!(sys.solve(7), Err(Error::SingularBlock { column: 7, row: 3 })));
    }
}
