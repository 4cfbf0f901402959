//! Frozen-coefficient linear solver for one Picard sub-problem
//!
//! ```text
//! ∂τ v + A(w) ∂ξ v + F(w, ∂η w) ∂η v + G(w) v = B(w) ∂η² v + s
//! ```
//!
//! with `w` the previous iterate. Each step treats `F ∂η` and `B ∂η²` implicitly
//! (one block-tridiagonal solve per ξ column) and `A ∂ξ`, `G` explicitly.

mod block;
pub mod ops;

pub use block::BlockTridiag;
pub use ops::{apply_derivative, Axis};

use rayon::prelude::*;

use crate::coeffs::{advection_speed, eval_advection, eval_diffusion, eval_lower_order, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::fields::{Grid, OutflowData, OutflowPoint, Params, State};
use crate::scalar::Real;
use ops::{d1_column, d1_periodic, d2_column};

/// Advective CFL number: `dt ≤ CFL · dξ / max |λ(A)|`.
pub const CFL: f64 = 0.5;

/// Additive right-hand side `s` of the transformed system, sampled per time level.
pub trait Forcing<T: Real>: Sync {
    /// Source at every node of `grid` (storage order) at time level `level`.
    fn sample(&self, grid: &Grid<T>, level: usize) -> Result<Vec<Vec3<T>>>;
}

/// Per-node coefficient matrices at one time level, frozen from the previous iterate.
#[derive(Clone, Debug)]
pub struct FrozenCoeffs<T> {
    pub a: Vec<Mat3<T>>,
    pub b: Vec<Mat3<T>>,
    pub f: Vec<Mat3<T>>,
    pub g: Vec<Mat3<T>>,
    /// Bound on the spectral radius of every `A`.
    pub max_speed: T,
}

impl<T: Real> FrozenCoeffs<T> {
    /// Evaluates `A, B, F, G` at `w`, with outer pressure data taken from `outflow` row.
    pub fn evaluate(w: &State<T>, outflow: &[OutflowPoint<T>], params: &Params<T>, grid: &Grid<T>) -> Result<Self> {
        let neta = grid.neta;
        let columns: Vec<_> = (0..grid.nx)
            .into_par_iter()
            .map(|i| {
                let op = &outflow[i];
                let cols = [w.u1.column(i), w.theta.column(i), w.q.column(i)];
                let mut out = Vec::with_capacity(neta);
                let mut speed = T::zero();
                for j in 0..neta {
                    let v = w.at(i, j);
                    let dv = Vec3(cols.map(|c| d1_column(c, j, grid.d_eta)));
                    let a = eval_advection(v, op.p, params)?;
                    let b = eval_diffusion(v, op.p, params)?;
                    let lo = eval_lower_order(v, dv, op.p, op.p_t, op.p_xi, params)?;
                    speed = speed.max(advection_speed(v, op.p, params)?);
                    out.push((a, b, lo.f_mat, lo.g_mat));
                }
                Ok((out, speed))
            })
            .collect::<Result<_>>()?;
        let n = grid.nodes();
        let mut fc = FrozenCoeffs {
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            f: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            max_speed: T::zero(),
        };
        for (col, speed) in columns {
            fc.max_speed = fc.max_speed.max(speed);
            for (a, b, f, g) in col {
                fc.a.push(a);
                fc.b.push(b);
                fc.f.push(f);
                fc.g.push(g);
            }
        }
        Ok(fc)
    }

    /// The same four matrices at every node. The speed bound is the row-sum norm of `a`.
    pub fn uniform(grid: &Grid<T>, a: Mat3<T>, b: Mat3<T>, f: Mat3<T>, g: Mat3<T>) -> Self {
        let n = grid.nodes();
        let max_speed =
            a.0.iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<T>())
                .fold(T::zero(), T::max);
        FrozenCoeffs {
            a: vec![a; n],
            b: vec![b; n],
            f: vec![f; n],
            g: vec![g; n],
            max_speed,
        }
    }

    /// Largest stable step for the explicit ξ transport.
    pub fn dt_limit(&self, grid: &Grid<T>) -> T {
        if self.max_speed > T::zero() {
            T::lit(CFL) * grid.d_xi / self.max_speed
        } else {
            T::infinity()
        }
    }
}

/// Imposes the wall and far-field conditions on a copy of `v`:
/// `u1 = 0`, `θ = θ*`, `(4 q1 − q2) / 3 = q0` at the wall and `v = v∞` at the far row.
pub fn apply_bcs<T: Real>(v: &State<T>, outflow: &OutflowData<T>, grid: &Grid<T>) -> State<T> {
    let mut out = v.clone();
    apply_bcs_in_place(&mut out, outflow, grid);
    out
}

pub fn apply_bcs_in_place<T: Real>(v: &mut State<T>, outflow: &OutflowData<T>, grid: &Grid<T>) {
    let level = outflow.level_for(v.time);
    let last = grid.neta - 1;
    for i in 0..grid.nx {
        let op = outflow.at(level, i);
        let q0 = (T::lit(4.0) * v.q.get(i, 1) - v.q.get(i, 2)) / T::lit(3.0);
        v.set(i, 0, Vec3([T::zero(), op.theta_star, q0]));
        v.set(i, last, op.v_inf());
    }
}

/// Advances `v_n` by one step of size `grid.dt` with coefficients `frozen`.
///
/// Boundary data and the source belong to the new time level.
pub fn step_linear<T: Real>(
    v_n: &State<T>,
    frozen: &FrozenCoeffs<T>,
    outflow: &OutflowData<T>,
    grid: &Grid<T>,
    source: Option<&[Vec3<T>]>,
) -> Result<State<T>> {
    let dt = grid.dt;
    let limit = frozen.dt_limit(grid);
    if dt > limit {
        return Err(Error::Stability {
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let nodes = grid.nodes();
    if frozen.a.len() != nodes || source.is_some_and(|s| s.len() != nodes) {
        return Err(Error::Sizing(
            "coefficient or source length differs from the grid".into(),
        ));
    }
    let t_new = v_n.time + dt;
    let level = outflow.level_for(t_new);
    let neta = grid.neta;
    let h = grid.d_eta;
    let two = T::lit(2.0);
    let c1 = dt / (two * h);
    let c2 = dt / (h * h);
    let id = Mat3::identity();

    let columns: Vec<Vec<Vec3<T>>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let op = outflow.at(level, i);
            let mut sys = BlockTridiag::new(neta);
            sys.diag[0] = Mat3::diag(T::one(), T::one(), T::lit(-3.0));
            sys.upper[0] = Mat3::diag(T::zero(), T::zero(), T::lit(4.0));
            sys.wall = Mat3::diag(T::zero(), T::zero(), -T::one());
            sys.rhs[0] = Vec3([T::zero(), op.theta_star, T::zero()]);
            for j in 1..neta - 1 {
                let k = grid.idx(i, j);
                let (a, b, f, g) = (frozen.a[k], frozen.b[k], frozen.f[k], frozen.g[k]);
                sys.lower[j] = f.scale(-c1) - b.scale(c2);
                sys.diag[j] = id + b.scale(two * c2);
                sys.upper[j] = f.scale(c1) - b.scale(c2);
                let v = v_n.at(i, j);
                let dv_xi = Vec3([
                    d1_periodic(&v_n.u1, i, j, grid.d_xi),
                    d1_periodic(&v_n.theta, i, j, grid.d_xi),
                    d1_periodic(&v_n.q, i, j, grid.d_xi),
                ]);
                let mut explicit = -(a * dv_xi) - g * v;
                if let Some(s) = source {
                    explicit = explicit + s[k];
                }
                sys.rhs[j] = v + explicit.scale(dt);
            }
            sys.rhs[neta - 1] = op.v_inf();
            sys.solve(i)
        })
        .collect::<Result<_>>()?;

    let mut out = State::zeros(grid, t_new);
    for (i, col) in columns.into_iter().enumerate() {
        for (j, x) in col.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    // the solved boundary rows agree with apply_bcs up to rounding; make them exact
    apply_bcs_in_place(&mut out, outflow, grid);
    Ok(out)
}

/// The nonlinear right-hand side `−A(v) ∂ξ v − f(v, ∂η v) − g(v) + B(v) ∂η² v` at every node.
pub fn spatial_operator<T: Real>(
    v: &State<T>,
    outflow: &[OutflowPoint<T>],
    params: &Params<T>,
    grid: &Grid<T>,
) -> Result<Vec<Vec3<T>>> {
    let columns: Vec<Vec<Vec3<T>>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let op = &outflow[i];
            let cols = [v.u1.column(i), v.theta.column(i), v.q.column(i)];
            (0..grid.neta)
                .map(|j| {
                    let w = v.at(i, j);
                    let dv = Vec3(cols.map(|c| d1_column(c, j, grid.d_eta)));
                    let d2v = Vec3(cols.map(|c| d2_column(c, j, grid.d_eta)));
                    let dxi = Vec3(v.components().map(|f| d1_periodic(f, i, j, grid.d_xi)));
                    let a = eval_advection(w, op.p, params)?;
                    let b = eval_diffusion(w, op.p, params)?;
                    let lo = eval_lower_order(w, dv, op.p, op.p_t, op.p_xi, params)?;
                    Ok(b * d2v - a * dxi - lo.f - lo.g)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

/// Marches from `v0` over every level of `grid`, refreezing coefficients from `v_prev`.
pub fn solve_linear_problem<T: Real>(
    v_prev: &[State<T>],
    v0: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<Vec<State<T>>> {
    let levels = grid.n_steps + 1;
    if v_prev.len() != levels {
        return Err(Error::MissingTimeLevel(format!(
            "frozen iterate has {} levels, grid needs {levels}",
            v_prev.len()
        )));
    }
    let mut traj = Vec::with_capacity(levels);
    traj.push(v0.clone());
    for k in 0..grid.n_steps {
        let frozen = FrozenCoeffs::evaluate(&v_prev[k + 1], outflow.row(k + 1), params, grid)?;
        let source = forcing.map(|f| f.sample(grid, k + 1)).transpose()?;
        let next = step_linear(&traj[k], &frozen, outflow, grid, source.as_deref())?;
        traj.push(next);
    }
    Ok(traj)
}
