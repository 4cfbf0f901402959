//! Second-order finite-difference operators on the `(ξ, η)` grid.

use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Xi,
    Eta,
}

/// First derivative of a column at node `j`, one-sided at both ends.
#[inline]
pub fn d1_column<T: Real>(col: &[T], j: usize, h: T) -> T {
    let n = col.len();
    let two = T::lit(2.0);
    if j == 0 {
        (T::lit(-3.0) * col[0] + T::lit(4.0) * col[1] - col[2]) / (two * h)
    } else if j == n - 1 {
        (T::lit(3.0) * col[n - 1] - T::lit(4.0) * col[n - 2] + col[n - 3]) / (two * h)
    } else {
        (col[j + 1] - col[j - 1]) / (two * h)
    }
}

/// Second derivative of a column at node `j`, one-sided four-point stencils at the ends.
#[inline]
pub fn d2_column<T: Real>(col: &[T], j: usize, h: T) -> T {
    let n = col.len();
    let h2 = h * h;
    let (two, four, five) = (T::lit(2.0), T::lit(4.0), T::lit(5.0));
    if j == 0 {
        (two * col[0] - five * col[1] + four * col[2] - col[3]) / h2
    } else if j == n - 1 {
        (two * col[n - 1] - five * col[n - 2] + four * col[n - 3] - col[n - 4]) / h2
    } else {
        (col[j + 1] - two * col[j] + col[j - 1]) / h2
    }
}

#[inline]
fn wrap(i: usize, offset: isize, n: usize) -> usize {
    (i as isize + offset).rem_euclid(n as isize) as usize
}

/// Centered periodic first derivative along the first index.
#[inline]
pub fn d1_periodic<T: Real>(f: &Field<T>, i: usize, j: usize, h: T) -> T {
    let n = f.nx;
    (f.get(wrap(i, 1, n), j) - f.get(wrap(i, -1, n), j)) / (T::lit(2.0) * h)
}

#[inline]
pub fn d2_periodic<T: Real>(f: &Field<T>, i: usize, j: usize, h: T) -> T {
    let n = f.nx;
    (f.get(wrap(i, 1, n), j) - T::lit(2.0) * f.get(i, j) + f.get(wrap(i, -1, n), j)) / (h * h)
}

/// Applies `∂ξ`, `∂ξ²`, `∂η` or `∂η²` to a field on `grid`.
pub fn apply_derivative<T: Real>(f: &Field<T>, axis: Axis, order: u8, grid: &Grid<T>) -> Result<Field<T>> {
    if f.nx != grid.nx || f.n != grid.neta {
        return Err(Error::Sizing(format!(
            "field is {}x{}, grid is {}x{}",
            f.nx, f.n, grid.nx, grid.neta
        )));
    }
    let out = match (axis, order) {
        (Axis::Xi, 1) => Field::from_fn(f.nx, f.n, |i, j| d1_periodic(f, i, j, grid.d_xi)),
        (Axis::Xi, 2) => Field::from_fn(f.nx, f.n, |i, j| d2_periodic(f, i, j, grid.d_xi)),
        (Axis::Eta, 1) => Field::from_fn(f.nx, f.n, |i, j| d1_column(f.column(i), j, grid.d_eta)),
        (Axis::Eta, 2) => Field::from_fn(f.nx, f.n, |i, j| d2_column(f.column(i), j, grid.d_eta)),
        _ => {
            return Err(Error::Unsupported(format!(
                "derivative of order {order} along {axis:?}"
            )))
        }
    };
    Ok(out)
}
