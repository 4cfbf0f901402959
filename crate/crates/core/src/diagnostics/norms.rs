//! Discrete `H^k(Ω)` norms with trapezoid weights in η.

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, State};
use crate::scalar::Real;
use crate::stepper::ops::{d1_column, d1_periodic, d2_column, d2_periodic};

/// Order of a discrete Sobolev norm; `time` adds `∂τ` derivatives from stored levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormSpec {
    pub k: usize,
    pub time: bool,
}

impl NormSpec {
    pub const L2: NormSpec = NormSpec { k: 0, time: false };

    pub fn h(k: usize) -> Self {
        NormSpec { k, time: false }
    }

    fn check(&self) -> Result<()> {
        if self.k > 2 {
            return Err(Error::Unsupported(format!("H^{} norm (k <= 2 supported)", self.k)));
        }
        Ok(())
    }
}

/// Quadrature weight of η node `j`.
#[inline]
pub fn eta_weight<T: Real>(j: usize, grid: &Grid<T>) -> T {
    if j == 0 || j == grid.neta - 1 {
        grid.d_eta / T::lit(2.0)
    } else {
        grid.d_eta
    }
}

/// `∫∫ f g dξ dη` by the rectangle rule in ξ and the trapezoid rule in η.
pub fn inner<T: Real>(f: &Field<T>, g: &Field<T>, grid: &Grid<T>) -> T {
    let mut total = T::zero();
    for i in 0..f.nx {
        let (a, b) = (f.column(i), g.column(i));
        let mut col = T::zero();
        for j in 0..f.n {
            col = col + eta_weight(j, grid) * a[j] * b[j];
        }
        total = total + col;
    }
    total * grid.d_xi
}

/// `∂ξ^a ∂η^b f` for `a + b ≤ 2`, built from the second-order stencils.
pub fn mixed_derivative<T: Real>(f: &Field<T>, a: usize, b: usize, grid: &Grid<T>) -> Field<T> {
    let (hx, he) = (grid.d_xi, grid.d_eta);
    match (a, b) {
        (0, 0) => f.clone(),
        (1, 0) => Field::from_fn(f.nx, f.n, |i, j| d1_periodic(f, i, j, hx)),
        (2, 0) => Field::from_fn(f.nx, f.n, |i, j| d2_periodic(f, i, j, hx)),
        (0, 1) => Field::from_fn(f.nx, f.n, |i, j| d1_column(f.column(i), j, he)),
        (0, 2) => Field::from_fn(f.nx, f.n, |i, j| d2_column(f.column(i), j, he)),
        (1, 1) => {
            let fe = mixed_derivative(f, 0, 1, grid);
            Field::from_fn(f.nx, f.n, |i, j| d1_periodic(&fe, i, j, hx))
        }
        _ => unreachable!("derivative order above 2"),
    }
}

/// Multi-indices `(a, b)` with `a + b ≤ k`.
pub fn multi_indices(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=k).flat_map(move |s| (0..=s).map(move |a| (a, s - a)))
}

/// Space-only discrete `H^k` norm of a field.
pub fn discrete_norm<T: Real>(field: &Field<T>, spec: NormSpec, grid: &Grid<T>) -> Result<T> {
    spec.check()?;
    if spec.time {
        return Err(Error::MissingTimeLevel(
            "time derivatives need a trajectory; use trajectory_norm".into(),
        ));
    }
    let mut sum = T::zero();
    for (a, b) in multi_indices(spec.k) {
        let d = mixed_derivative(field, a, b, grid);
        sum = sum + inner(&d, &d, grid);
    }
    Ok(sum.sqrt())
}

/// Norm of a field at `level` of a stored sequence. With `spec.time`, backward
/// time differences enter the multi-index sum alongside the spatial ones.
pub fn trajectory_norm<T: Real>(levels: &[&Field<T>], level: usize, spec: NormSpec, grid: &Grid<T>) -> Result<T> {
    spec.check()?;
    if level >= levels.len() {
        return Err(Error::MissingTimeLevel(format!("level {level} of {}", levels.len())));
    }
    if !spec.time {
        return discrete_norm(levels[level], spec, grid);
    }
    if level < spec.k {
        return Err(Error::MissingTimeLevel(format!(
            "∂τ^{} at level {level} needs {} earlier levels",
            spec.k, spec.k
        )));
    }
    // backward differences ∂τ^c f at `level`, c = 0..=k
    let mut diffs: Vec<Field<T>> = vec![levels[level].clone()];
    for c in 1..=spec.k {
        let d = Field::from_fn(grid.nx, grid.neta, |i, j| {
            let mut acc = T::zero();
            for m in 0..=c {
                let binom = T::lit(binomial(c, m) as f64);
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                acc = acc + sign * binom * levels[level - m].get(i, j);
            }
            acc / grid.dt.powi(c as i32)
        });
        diffs.push(d);
    }
    let mut sum = T::zero();
    for (c, d) in diffs.iter().enumerate() {
        for (a, b) in multi_indices(spec.k - c) {
            let m = mixed_derivative(d, a, b, grid);
            sum = sum + inner(&m, &m, grid);
        }
    }
    Ok(sum.sqrt())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `sqrt(Σ_c ‖v_c‖²)` over the three components.
pub fn state_norm<T: Real>(v: &State<T>, spec: NormSpec, grid: &Grid<T>) -> Result<T> {
    let mut sum = T::zero();
    for f in v.components() {
        sum = sum + discrete_norm(f, spec, grid)?.powi(2);
    }
    Ok(sum.sqrt())
}

/// `sup` over levels of the distance between two trajectories.
pub fn sup_distance<T: Real>(a: &[State<T>], b: &[State<T>], spec: NormSpec, grid: &Grid<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Sizing(format!(
            "trajectories of {} and {} levels",
            a.len(),
            b.len()
        )));
    }
    let mut d = T::zero();
    for (x, y) in a.iter().zip(b) {
        d = d.max(state_norm(&x.sub(y), spec, grid)?);
    }
    Ok(d)
}
