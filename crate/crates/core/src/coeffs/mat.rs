//! Small fixed-size linear algebra for the 3-component system.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Real;

/// A 3-vector, e.g. `(u1, theta, q)` at one node.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

/// A dense 3x3 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Vec3([a, b, c])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn scale(self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn dot(self, o: Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn max_abs(self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Mat3([[a, z, z], [z, b, z], [z, z, c]])
    }

    pub fn scale(self, s: T) -> Self {
        let mut m = self;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x = *x * s;
            }
        }
        m
    }

    pub fn transpose(self) -> Self {
        let m = self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn max_abs(self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn det(self) -> T {
        let m = self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by cofactors; `None` when the determinant is negligible relative to the entries.
    pub fn inverse(self) -> Option<Self> {
        let m = self.0;
        let det = self.det();
        let scale = self.max_abs();
        if scale == T::zero() || !det.is_finite() || det.abs() <= T::epsilon() * scale * scale * scale {
            return None;
        }
        let inv = T::one() / det;
        let c = |a: T, b: T, c: T, d: T| (a * d - b * c) * inv;
        Some(Mat3([
            [
                c(m[1][1], m[1][2], m[2][1], m[2][2]),
                -c(m[0][1], m[0][2], m[2][1], m[2][2]),
                c(m[0][1], m[0][2], m[1][1], m[1][2]),
            ],
            [
                -c(m[1][0], m[1][2], m[2][0], m[2][2]),
                c(m[0][0], m[0][2], m[2][0], m[2][2]),
                -c(m[0][0], m[0][2], m[1][0], m[1][2]),
            ],
            [
                c(m[1][0], m[1][1], m[2][0], m[2][1]),
                -c(m[0][0], m[0][1], m[2][0], m[2][1]),
                c(m[0][0], m[0][1], m[1][0], m[1][1]),
            ],
        ]))
    }

    /// Lower Cholesky factor of a symmetric matrix, `None` unless positive definite.
    pub fn cholesky(self) -> Option<Self> {
        let a = self.0;
        let mut l = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s = s - l[i][k] * l[j][k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return None;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Some(Mat3(l))
    }

    /// Largest entry of `|self - selfᵀ|`.
    pub fn asymmetry(self) -> T {
        (self - self.transpose()).max_abs()
    }

    /// Max-norm distance from `reference`, relative to the size of `reference`.
    pub fn rel_diff(self, reference: Self) -> T {
        let scale = reference.max_abs().max(T::min_positive_value());
        (self - reference).max_abs() / scale
    }
}

impl<T: Real> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = m.0[i][j] + o.0[i][j];
            }
        }
        m
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = m.0[i][j] - o.0[i][j];
            }
        }
        m
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        m
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        let m = self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat3([[4.0, 1.0, 0.5], [0.2, 3.0, -1.0], [0.0, 2.0, 5.0]]);
        let inv = m.inverse().unwrap();
        assert!((m * inv).rel_diff(Mat3::identity()) < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert!(m.inverse().is_none());
        assert!(Mat3::<f64>::zero().inverse().is_none());
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let spd = Mat3([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]);
        let l = spd.cholesky().unwrap();
        assert!((l * l.transpose()).rel_diff(spd) < 1e-15);
        let indef = Mat3([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(indef.cholesky().is_none());
    }
}
