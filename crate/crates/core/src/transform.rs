//! Stream-function coordinates.
//!
//! The transformed height is `η = ψ(t, x, y)` with `∂yψ = h1`, so
//! `y = ∫₀^ψ dη / ĥ1`. This module maps physical initial data to the `(ξ, η)`
//! grid, rebuilds `ψ` from a solved `ĥ1`, and pulls the solution back to
//! `(ρ, u1, u2, θ, h1, h2)` on a uniform physical grid.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::diagnostics::{EquationResidual, ResidualReport};
use crate::error::{Error, Result};
use crate::fields::{Field, Grid, OutflowData, Params, State};
use crate::scalar::Real;
use crate::stepper::ops::{d1_column, d1_periodic, d2_column};

/// Uniform physical grid over `𝕋 × [0, y_max]`, sharing the ξ nodes of the solver grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub y_max: T,
    pub dx: T,
    pub dy: T,
}

impl<T: Real> PhysicalGrid<T> {
    pub fn new(nx: usize, ny: usize, y_max: T) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::Sizing(format!("physical grid {nx}x{ny} (need at least 4x4)")));
        }
        if !(y_max > T::zero()) || !y_max.is_finite() {
            return Err(Error::Sizing(format!("y_max = {y_max} must be positive")));
        }
        Ok(PhysicalGrid {
            nx,
            ny,
            y_max,
            dx: T::lit(2.0 * PI) / T::lit(nx as f64),
            dy: y_max / T::lit((ny - 1) as f64),
        })
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        T::lit(i as f64) * self.dx
    }

    #[inline]
    pub fn y(&self, m: usize) -> T {
        T::lit(m as f64) * self.dy
    }

    pub fn y_nodes(&self) -> Vec<T> {
        (0..self.ny).map(|m| self.y(m)).collect()
    }
}

/// `ψ(t, x, y)` on a physical grid, together with the table `y(η)` it was inverted from.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamField<T> {
    pub psi: Field<T>,
    /// `y` as a function of the η nodes, `nx × neta`.
    pub y_of_eta: Field<T>,
}

/// Recovered physical fields at one time, each `nx × ny`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalState<T> {
    pub rho: Field<T>,
    pub u1: Field<T>,
    pub u2: Field<T>,
    pub theta: Field<T>,
    pub h1: Field<T>,
    pub h2: Field<T>,
    pub time: T,
}

impl<T: Real> PhysicalState<T> {
    pub fn fields(&self) -> [(&'static str, &Field<T>); 6] {
        [
            ("rho", &self.rho),
            ("u1", &self.u1),
            ("u2", &self.u2),
            ("theta", &self.theta),
            ("h1", &self.h1),
            ("h2", &self.h2),
        ]
    }

    /// `max |∂x h1 + ∂y h2|` with the discrete operators used to build `h1, h2` from `ψ`.
    pub fn divergence(&self, pgrid: &PhysicalGrid<T>) -> T {
        let mut m = T::zero();
        for i in 0..pgrid.nx {
            let h2 = self.h2.column(i);
            for j in 0..pgrid.ny {
                let d = d1_periodic(&self.h1, i, j, pgrid.dx) + d1_column(h2, j, pgrid.dy);
                m = m.max(d.abs());
            }
        }
        m
    }

    /// `max |Rρθ + h1²/2 − P|`.
    pub fn pressure_defect(&self, outflow: &OutflowData<T>, params: &Params<T>) -> T {
        let level = outflow.level_for(self.time);
        let mut m = T::zero();
        for i in 0..self.rho.nx {
            let p = outflow.at(level, i).p;
            for j in 0..self.rho.n {
                let h = self.h1.get(i, j);
                let d = params.r_gas * self.rho.get(i, j) * self.theta.get(i, j) + h * h / T::lit(2.0) - p;
                m = m.max(d.abs());
            }
        }
        m
    }
}

/// Cumulative trapezoid integral of `f` sampled with spacing `h`, starting at 0.
pub fn cumulative_trapezoid<T: Real>(f: &[T], h: T) -> Vec<T> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = T::zero();
    out.push(acc);
    for w in f.windows(2) {
        acc = acc + h * (w[0] + w[1]) / T::lit(2.0);
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`, with `xs` strictly increasing.
/// `None` outside `[xs[0], xs[last]]` beyond a relative slack of 1e-12.
pub fn interp_linear<T: Real>(xs: &[T], ys: &[T], x: T) -> Option<T> {
    let n = xs.len();
    let slack = T::lit(1e-12) * xs[n - 1].abs().max(T::one());
    if x < xs[0] - slack || x > xs[n - 1] + slack {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    Some(ys[k - 1] + w * (ys[k] - ys[k - 1]))
}

/// Cubic Hermite interpolation of `(xs, ys)` with node slopes `dys` at `x`, `xs` strictly
/// increasing and `ys` increasing. Slopes are limited per interval (Fritsch–Carlson) so the
/// interpolant stays monotone. `None` outside the table, as for [`interp_linear`].
pub fn interp_hermite<T: Real>(xs: &[T], ys: &[T], dys: &[T], x: T) -> Option<T> {
    let n = xs.len();
    let slack = T::lit(1e-12) * xs[n - 1].abs().max(T::one());
    if x < xs[0] - slack || x > xs[n - 1] + slack {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
    let h = x1 - x0;
    let secant = (y1 - y0) / h;
    let (mut m0, mut m1) = (dys[k - 1], dys[k]);
    if secant > T::zero() {
        let (a, b) = (m0 / secant, m1 / secant);
        let r = a * a + b * b;
        if r > T::lit(9.0) {
            let tau = T::lit(3.0) / r.sqrt();
            m0 = tau * a * secant;
            m1 = tau * b * secant;
        }
    } else {
        m0 = T::zero();
        m1 = T::zero();
    }
    let t = ((x - x0) / h).max(T::zero()).min(T::one());
    let (t2, t3) = (t * t, t * t * t);
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + t;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    Some(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1)
}

fn nondegenerate<T: Real>(h1: &Field<T>, delta: T) -> Result<()> {
    for i in 0..h1.nx {
        for (j, &h) in h1.column(i).iter().enumerate() {
            if !(h >= delta) {
                return Err(Error::Nondegeneracy {
                    value: h.as_f64(),
                    delta: delta.as_f64(),
                    i,
                    j,
                });
            }
        }
    }
    Ok(())
}

/// Maps physical initial data `(u1₀, θ₀, h1₀)` on `pgrid` to the η grid.
///
/// `η(x, y) = ∫₀^y h1₀ dy'` by cumulative trapezoid; the hatted fields are the
/// physical ones interpolated linearly in `η`. Returns the hatted state at `τ = 0`
/// and the `η(x, y)` table.
pub fn initial_eta_map<T: Real>(
    u10: &Field<T>,
    theta0: &Field<T>,
    h10: &Field<T>,
    pgrid: &PhysicalGrid<T>,
    grid: &Grid<T>,
    delta: T,
) -> Result<(State<T>, Field<T>)> {
    if grid.nx != pgrid.nx {
        return Err(Error::Sizing(format!(
            "physical nx {} differs from solver nx {}",
            pgrid.nx, grid.nx
        )));
    }
    for f in [u10, theta0, h10] {
        if f.nx != pgrid.nx || f.n != pgrid.ny {
            return Err(Error::Sizing("initial field does not match the physical grid".into()));
        }
    }
    nondegenerate(h10, delta)?;
    let mut eta = Field::zeros(pgrid.nx, pgrid.ny);
    let mut v = State::zeros(grid, T::zero());
    for i in 0..pgrid.nx {
        let table = cumulative_trapezoid(h10.column(i), pgrid.dy);
        eta.column_mut(i).copy_from_slice(&table);
        let top = table[pgrid.ny - 1];
        for j in 0..grid.neta {
            let e = grid.eta(j);
            let at = |f: &Field<T>| {
                interp_linear(&table, f.column(i), e).ok_or_else(|| {
                    Error::OutOfRange(format!(
                        "eta_max = {} exceeds eta(y_max) = {top} at x index {i}; enlarge y_max",
                        grid.eta_max
                    ))
                })
            };
            let h = at(h10)?;
            v.u1.set(i, j, at(u10)?);
            v.theta.set(i, j, at(theta0)?);
            v.q.set(i, j, h * h / T::lit(2.0));
        }
    }
    Ok((v, eta))
}

/// Rebuilds `ψ` on `pgrid` from `ĥ1` by inverting `y(η) = ∫₀^η dη'/ĥ1`.
///
/// The inverse uses the exact slopes `dη/dy = ĥ1`, so `ψ` is C¹ in `y` and `∂yψ` stays second order.
pub fn stream_from_h1<T: Real>(
    h1_hat: &Field<T>,
    grid: &Grid<T>,
    pgrid: &PhysicalGrid<T>,
    delta: T,
) -> Result<StreamField<T>> {
    nondegenerate(h1_hat, delta)?;
    let mut y_of_eta = Field::zeros(grid.nx, grid.neta);
    let mut psi = Field::zeros(pgrid.nx, pgrid.ny);
    let etas: Vec<T> = (0..grid.neta).map(|j| grid.eta(j)).collect();
    for i in 0..grid.nx {
        let inv: Vec<T> = h1_hat.column(i).iter().map(|&h| T::one() / h).collect();
        let y = cumulative_trapezoid(&inv, grid.d_eta);
        let top = y[grid.neta - 1];
        for m in 0..pgrid.ny {
            let p = interp_hermite(&y, &etas, h1_hat.column(i), pgrid.y(m)).ok_or_else(|| {
                Error::OutOfRange(format!(
                    "y_max = {} exceeds y(eta_max) = {top} at x index {i}; enlarge eta_max",
                    pgrid.y_max
                ))
            })?;
            psi.set(i, m, p);
        }
        y_of_eta.column_mut(i).copy_from_slice(&y);
    }
    Ok(StreamField { psi, y_of_eta })
}

/// Smallest physical height `y(η_max) = ∫₀^η_max dη/ĥ1` over the columns of `h1_hat`.
pub fn y_extent<T: Real>(h1_hat: &Field<T>, grid: &Grid<T>) -> T {
    (0..grid.nx)
        .map(|i| {
            let inv: Vec<T> = h1_hat.column(i).iter().map(|&h| T::one() / h).collect();
            cumulative_trapezoid(&inv, grid.d_eta)[grid.neta - 1]
        })
        .fold(T::infinity(), T::min)
}

/// Pulls a transformed state back to physical variables.
///
/// `neighbor` is another stored level of the same trajectory; it supplies `∂τĥ1`
/// by a one-sided difference. With `ψ_t = ĥ1 ∫₀^ψ ∂τĥ1/ĥ1²`, `ψ_x = ĥ1 ∫₀^ψ ∂ξĥ1/ĥ1²`
/// and `ψ_yy = ĥ1 ∂ηĥ1`, the derived fields are
/// `u2 = −(ψ_t + u1 ψ_x − ν ψ_yy)/h1`, `h1 = D_y ψ`, `h2 = −D_x ψ` and
/// `ρ = (2P − h1²)/(2Rθ)`.
pub fn pullback_physical<T: Real>(
    current: &State<T>,
    neighbor: Option<&State<T>>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    pgrid: &PhysicalGrid<T>,
) -> Result<PhysicalState<T>> {
    let neighbor =
        neighbor.ok_or_else(|| Error::MissingTimeLevel("pullback needs a second time level for ∂tψ".into()))?;
    let span = current.time - neighbor.time;
    if span == T::zero() {
        return Err(Error::MissingTimeLevel("neighbor level has the same time".into()));
    }
    let h_hat = current.h1();
    let h_nb = neighbor.h1();
    let stream = stream_from_h1(&h_hat, grid, pgrid, params.delta)?;
    let h_t = h_hat.zip_map(&h_nb, |a, b| (a - b) / span);
    let etas: Vec<T> = (0..grid.neta).map(|j| grid.eta(j)).collect();
    let level = outflow.level_for(current.time);

    // per x column: (u1, theta, psi_t, psi_x, psi_yy) at each physical height
    let columns: Vec<[Vec<T>; 5]> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let h = h_hat.column(i);
            let dh_eta: Vec<T> = (0..grid.neta).map(|j| d1_column(h, j, grid.d_eta)).collect();
            let dh_xi: Vec<T> = (0..grid.neta).map(|j| d1_periodic(&h_hat, i, j, grid.d_xi)).collect();
            let weight = |d: &[T]| -> Vec<T> { d.iter().zip(h).map(|(&d, &h)| d / (h * h)).collect() };
            let it = cumulative_trapezoid(&weight(h_t.column(i)), grid.d_eta);
            let ix = cumulative_trapezoid(&weight(&dh_xi), grid.d_eta);
            let mut out: [Vec<T>; 5] = Default::default();
            for m in 0..pgrid.ny {
                let psi = stream.psi.get(i, m);
                let at = |ys: &[T]| interp_linear(&etas, ys, psi).expect("psi lies in [0, eta_max]");
                let hh = at(h);
                out[0].push(at(current.u1.column(i)));
                out[1].push(at(current.theta.column(i)));
                out[2].push(hh * at(&it));
                out[3].push(hh * at(&ix));
                out[4].push(hh * at(&dh_eta));
            }
            out
        })
        .collect();

    let (nx, ny) = (pgrid.nx, pgrid.ny);
    let psi = &stream.psi;
    let h1 = Field::from_fn(nx, ny, |i, m| d1_column(psi.column(i), m, pgrid.dy));
    let h2 = Field::from_fn(nx, ny, |i, m| -d1_periodic(psi, i, m, pgrid.dx));
    let u1 = Field::from_fn(nx, ny, |i, m| columns[i][0][m]);
    let theta = Field::from_fn(nx, ny, |i, m| columns[i][1][m]);
    let u2 = Field::from_fn(nx, ny, |i, m| {
        let [_, _, pt, px, pyy] = &columns[i];
        -(pt[m] + u1.get(i, m) * px[m] - params.nu * pyy[m]) / h1.get(i, m)
    });
    let rho = Field::from_fn(nx, ny, |i, m| {
        let p = outflow.at(level, i).p;
        let h = h1.get(i, m);
        (T::lit(2.0) * p - h * h) / (T::lit(2.0) * params.r_gas * theta.get(i, m))
    });
    Ok(PhysicalState {
        rho,
        u1,
        u2,
        theta,
        h1,
        h2,
        time: current.time,
    })
}

const ORIGINAL_EQUATIONS: [&str; 5] = ["momentum", "temperature", "induction", "divergence u", "divergence h"];

/// Residuals of the five physical equations at the middle of three consecutive levels,
/// interior `y` nodes, all `x`.
pub fn residual_original<T: Real>(
    ps: [&PhysicalState<T>; 3],
    outflow: &OutflowData<T>,
    params: &Params<T>,
    pgrid: &PhysicalGrid<T>,
) -> Result<ResidualReport<T>> {
    let [prev, mid, next] = ps;
    let span = next.time - prev.time;
    if !(span > T::zero()) {
        return Err(Error::MissingTimeLevel("levels must be increasing in time".into()));
    }
    let level = outflow.level_for(mid.time);
    let Params {
        mu,
        kappa,
        nu,
        r_gas,
        a,
        ..
    } = *params;
    let (one, two, half) = (T::one(), T::lit(2.0), T::lit(0.5));
    let (dx, dy) = (pgrid.dx, pgrid.dy);
    let mut max = [T::zero(); 5];
    let mut sq = [T::zero(); 5];
    for i in 0..pgrid.nx {
        let op = outflow.at(level, i);
        let (p, p_t, p_x) = (op.p, op.p_t, op.p_xi);
        for m in 1..pgrid.ny - 1 {
            let dt = |f: fn(&PhysicalState<T>) -> &Field<T>| (f(next).get(i, m) - f(prev).get(i, m)) / span;
            let ddx = |f: &Field<T>| d1_periodic(f, i, m, dx);
            let ddy = |f: &Field<T>| d1_column(f.column(i), m, dy);
            let ddyy = |f: &Field<T>| d2_column(f.column(i), m, dy);

            let u = mid.u1.get(i, m);
            let v = mid.u2.get(i, m);
            let th = mid.theta.get(i, m);
            let h = mid.h1.get(i, m);
            let g = mid.h2.get(i, m);
            let (u_x, u_y, u_yy) = (ddx(&mid.u1), ddy(&mid.u1), ddyy(&mid.u1));
            let (th_x, th_y, th_yy) = (ddx(&mid.theta), ddy(&mid.theta), ddyy(&mid.theta));
            let (h_x, h_y, h_yy) = (ddx(&mid.h1), ddy(&mid.h1), ddyy(&mid.h1));
            let v_y = ddy(&mid.u2);
            let g_y = ddy(&mid.h2);

            let pmq = p - half * h * h;
            let qt = p + half * (one - two * a) * h * h;
            let stretch = h * u_x + g * u_y;
            let drift = p_t + p_x * u;
            let heat = kappa * th_yy + mu * u_y * u_y + nu * h_y * h_y;

            let r = [
                dt(|s| &s.u1) + u * u_x + v * u_y - r_gas * th / pmq * (h * h_x + g * h_y) + r_gas * p_x * th / pmq
                    - mu * r_gas * th / pmq * u_yy,
                dt(|s| &s.theta) + u * th_x + v * th_y + a * th * h / qt * stretch
                    - a * drift * th / qt
                    - a * th * (p + half * h * h) / (qt * pmq) * heat
                    + a * nu * th * h / qt * h_yy,
                dt(|s| &s.h1) + u * h_x + v * h_y
                    - pmq / qt * stretch
                    - (one - a) * drift * h / qt
                    - nu * pmq / qt * h_yy
                    + a * h / qt * heat,
                u_x + v_y - (one - a) / qt * h * (stretch + nu * h_yy) + (one - a) / qt * drift - a / qt * heat,
                h_x + g_y,
            ];
            for c in 0..5 {
                max[c] = max[c].max(r[c].abs());
                sq[c] = sq[c] + r[c] * r[c];
            }
        }
    }
    Ok(ResidualReport {
        equations: (0..5)
            .map(|c| EquationResidual {
                name: ORIGINAL_EQUATIONS[c].to_string(),
                max: max[c],
                l2: (sq[c] * dx * dy).sqrt(),
            })
            .collect(),
        divergence: Some(mid.divergence(pgrid)),
        pressure: Some(mid.pressure_defect(outflow, params)),
        time: mid.time,
    })
}
