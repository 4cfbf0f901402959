//! Grids, parameter sets, field containers and admissibility checks.
//!
//! The transformed domain is `ξ ∈ 𝕋` (periodic, `nx` nodes) times `η ∈ [0, eta_max]`
//! (`neta` nodes, wall at index 0, far field at `neta - 1`). Field data is stored
//! with the η index fastest: node `(i, j)` lives at `i * neta + j`.

use std::f64::consts::PI;

use crate::coeffs::Vec3;
use crate::error::{Error, Result};
use crate::expr::FieldExpr;
use crate::scalar::Real;

/// Physical parameters of the reduced system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params<T> {
    pub mu: T,
    pub kappa: T,
    pub nu: T,
    pub r_gas: T,
    pub c_v: T,
    /// `R / (c_V + R)`, cached.
    pub a: T,
    /// Admissibility margin.
    pub delta: T,
}

impl<T: Real> Params<T> {
    pub fn new(mu: T, kappa: T, nu: T, r_gas: T, c_v: T, delta: T) -> Result<Self> {
        for (name, v) in [
            ("mu", mu),
            ("kappa", kappa),
            ("nu", nu),
            ("R", r_gas),
            ("cV", c_v),
            ("delta", delta),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Params {
            mu,
            kappa,
            nu,
            r_gas,
            c_v,
            a: r_gas / (c_v + r_gas),
            delta,
        })
    }

    /// Unit diffusivities and gas constants with the given margin.
    pub fn unit(delta: T) -> Self {
        Self::new(T::one(), T::one(), T::one(), T::one(), T::one(), delta).expect("unit parameters are valid")
    }

    /// Same parameters with the diffusivities `(mu, kappa, nu)` scaled by `s`.
    pub fn with_scaled_diffusivities(self, s: T) -> Self {
        Params {
            mu: self.mu * s,
            kappa: self.kappa * s,
            nu: self.nu * s,
            ..self
        }
    }

    /// `Q = P + (1 - 2a) q`.
    #[inline]
    pub fn q_total(&self, p: T, q: T) -> T {
        p + (T::one() - T::lit(2.0) * self.a) * q
    }
}

/// Tensor grid over `[0, T] × 𝕋 × [0, eta_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub nx: usize,
    pub neta: usize,
    pub eta_max: T,
    pub dt: T,
    pub t_end: T,
    pub d_xi: T,
    pub d_eta: T,
    /// Number of time steps, `t_end / dt`.
    pub n_steps: usize,
}

/// Validates sizes and builds a [`Grid`].
pub fn make_grid<T: Real>(nx: usize, neta: usize, eta_max: T, dt: T, t_end: T) -> Result<Grid<T>> {
    if nx < 4 {
        return Err(Error::Sizing(format!("nx = {nx} < 4")));
    }
    if neta < 8 {
        return Err(Error::Sizing(format!("neta = {neta} < 8")));
    }
    if !(eta_max > T::zero()) || !eta_max.is_finite() {
        return Err(Error::Sizing(format!("eta_max = {eta_max} must be positive")));
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Sizing(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(Error::Sizing(format!("t_end = {t_end} must be at least dt = {dt}")));
    }
    let ratio = (t_end / dt).as_f64();
    let n_steps = ratio.round();
    if (ratio - n_steps).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::Sizing(format!(
            "t_end = {t_end} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(Grid {
        nx,
        neta,
        eta_max,
        dt,
        t_end,
        d_xi: T::lit(2.0 * PI) / T::lit(nx as f64),
        d_eta: eta_max / T::lit((neta - 1) as f64),
        n_steps: n_steps as usize,
    })
}

impl<T: Real> Grid<T> {
    #[inline]
    pub fn xi(&self, i: usize) -> T {
        T::lit(i as f64) * self.d_xi
    }

    #[inline]
    pub fn eta(&self, j: usize) -> T {
        T::lit(j as f64) * self.d_eta
    }

    #[inline]
    pub fn time(&self, level: usize) -> T {
        T::lit(level as f64) * self.dt
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.neta + j
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.neta
    }

    /// Same spatial layout with a different time step and horizon.
    pub fn with_time(&self, dt: T, t_end: T) -> Result<Self> {
        make_grid(self.nx, self.neta, self.eta_max, dt, t_end)
    }
}

/// A scalar field on an `nx × n` tensor layout, second index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub nx: usize,
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn zeros(nx: usize, n: usize) -> Self {
        Field {
            nx,
            n,
            data: vec![T::zero(); nx * n],
        }
    }

    pub fn constant(nx: usize, n: usize, value: T) -> Self {
        Field {
            nx,
            n,
            data: vec![value; nx * n],
        }
    }

    pub fn from_fn(nx: usize, n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * n);
        for i in 0..nx {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Field { nx, n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn column(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field {
            nx: self.nx,
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.data.len(), other.data.len(), "field shapes differ");
        Field {
            nx: self.nx,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &x| m.min(x))
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &x| m.max(x))
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// The transformed unknown `v = (u1, theta, q)` at one time level, `q = h1² / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T> {
    pub u1: Field<T>,
    pub theta: Field<T>,
    pub q: Field<T>,
    pub time: T,
}

impl<T: Real> State<T> {
    pub fn zeros(grid: &Grid<T>, time: T) -> Self {
        let z = Field::zeros(grid.nx, grid.neta);
        State {
            u1: z.clone(),
            theta: z.clone(),
            q: z,
            time,
        }
    }

    pub fn constant(grid: &Grid<T>, v: Vec3<T>, time: T) -> Self {
        State {
            u1: Field::constant(grid.nx, grid.neta, v[0]),
            theta: Field::constant(grid.nx, grid.neta, v[1]),
            q: Field::constant(grid.nx, grid.neta, v[2]),
            time,
        }
    }

    pub fn from_fn(grid: &Grid<T>, time: T, mut f: impl FnMut(usize, usize) -> Vec3<T>) -> Self {
        let mut s = Self::zeros(grid, time);
        for i in 0..grid.nx {
            for j in 0..grid.neta {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    pub fn nx(&self) -> usize {
        self.u1.nx
    }

    pub fn neta(&self) -> usize {
        self.u1.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Vec3<T> {
        Vec3([self.u1.get(i, j), self.theta.get(i, j), self.q.get(i, j)])
    }

    #[inline]
    pub fn at_index(&self, k: usize) -> Vec3<T> {
        Vec3([self.u1.data[k], self.theta.data[k], self.q.data[k]])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Vec3<T>) {
        self.u1.set(i, j, v[0]);
        self.theta.set(i, j, v[1]);
        self.q.set(i, j, v[2]);
    }

    pub fn component(&self, c: usize) -> &Field<T> {
        match c {
            0 => &self.u1,
            1 => &self.theta,
            2 => &self.q,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut Field<T> {
        match c {
            0 => &mut self.u1,
            1 => &mut self.theta,
            2 => &mut self.q,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn components(&self) -> [&Field<T>; 3] {
        [&self.u1, &self.theta, &self.q]
    }

    /// Tangential magnetic field `h1 = sqrt(2 q)`.
    pub fn h1(&self) -> Field<T> {
        self.q.map(|q| (T::lit(2.0) * q.max(T::zero())).sqrt())
    }

    /// Node-wise `self - other`, keeping `self.time`.
    pub fn sub(&self, other: &Self) -> Self {
        State {
            u1: self.u1.zip_map(&other.u1, |a, b| a - b),
            theta: self.theta.zip_map(&other.theta, |a, b| a - b),
            q: self.q.zip_map(&other.q, |a, b| a - b),
            time: self.time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.theta.is_finite() && self.q.is_finite()
    }
}

/// Recipe for the outer traces `U, Θ, H, P, θ*` as functions of `(t, ξ)`.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum OutflowRecipe {
    Constant {
        u: f64,
        theta: f64,
        h: f64,
        p: f64,
        theta_star: f64,
    },
    /// Closed-form expressions in the variables `t` and `x`.
    Expressions {
        u: FieldExpr,
        theta: FieldExpr,
        h: FieldExpr,
        p: FieldExpr,
        theta_star: FieldExpr,
    },
}

/// Variables available to outflow expressions.
pub const OUTFLOW_VARS: [&str; 2] = ["t", "x"];

impl OutflowRecipe {
    /// Parses the five trace expressions.
    pub fn expressions(u: &str, theta: &str, h: &str, p: &str, theta_star: &str) -> Result<Self> {
        Ok(OutflowRecipe::Expressions {
            u: FieldExpr::parse("U", u, &OUTFLOW_VARS)?,
            theta: FieldExpr::parse("Theta", theta, &OUTFLOW_VARS)?,
            h: FieldExpr::parse("H", h, &OUTFLOW_VARS)?,
            p: FieldExpr::parse("P", p, &OUTFLOW_VARS)?,
            theta_star: FieldExpr::parse("theta_star", theta_star, &OUTFLOW_VARS)?,
        })
    }

    fn point(&self, t: f64, x: f64) -> Result<OutflowPoint<f64>> {
        match self {
            OutflowRecipe::Constant {
                u,
                theta,
                h,
                p,
                theta_star,
            } => Ok(OutflowPoint {
                u: *u,
                theta: *theta,
                h: *h,
                p: *p,
                theta_star: *theta_star,
                ..OutflowPoint::default()
            }),
            OutflowRecipe::Expressions {
                u,
                theta,
                h,
                p,
                theta_star,
            } => {
                let at = [t, x];
                Ok(OutflowPoint {
                    u: u.eval(&at)?,
                    theta: theta.eval(&at)?,
                    h: h.eval(&at)?,
                    p: p.eval(&at)?,
                    theta_star: theta_star.eval(&at)?,
                    u_t: u.partial(0, &at)?,
                    u_xi: u.partial(1, &at)?,
                    theta_t: theta.partial(0, &at)?,
                    theta_xi: theta.partial(1, &at)?,
                    h_t: h.partial(0, &at)?,
                    h_xi: h.partial(1, &at)?,
                    p_t: p.partial(0, &at)?,
                    p_xi: p.partial(1, &at)?,
                    theta_star_t: theta_star.partial(0, &at)?,
                })
            }
        }
    }
}

/// Outer traces and the derivatives the solver consumes, at one `(t, ξ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OutflowPoint<T> {
    pub u: T,
    pub theta: T,
    pub h: T,
    pub p: T,
    pub theta_star: T,
    pub u_t: T,
    pub u_xi: T,
    pub theta_t: T,
    pub theta_xi: T,
    pub h_t: T,
    pub h_xi: T,
    pub p_t: T,
    pub p_xi: T,
    pub theta_star_t: T,
}

impl<T: Real> OutflowPoint<T> {
    fn cast<S: Real>(p: &OutflowPoint<S>) -> Self {
        let c = |x: S| T::lit(x.as_f64());
        OutflowPoint {
            u: c(p.u),
            theta: c(p.theta),
            h: c(p.h),
            p: c(p.p),
            theta_star: c(p.theta_star),
            u_t: c(p.u_t),
            u_xi: c(p.u_xi),
            theta_t: c(p.theta_t),
            theta_xi: c(p.theta_xi),
            h_t: c(p.h_t),
            h_xi: c(p.h_xi),
            p_t: c(p.p_t),
            p_xi: c(p.p_xi),
            theta_star_t: c(p.theta_star_t),
        }
    }

    /// Far-field value `v∞ = (U, Θ, H² / 2)`.
    pub fn v_inf(&self) -> Vec3<T> {
        Vec3([self.u, self.theta, self.h * self.h / T::lit(2.0)])
    }
}

/// Outflow traces sampled at every time level and ξ node of a grid.
#[derive(Clone, Debug)]
pub struct OutflowData<T> {
    pub nx: usize,
    pub levels: usize,
    pub dt: T,
    points: Vec<OutflowPoint<T>>,
}

impl<T: Real> OutflowData<T> {
    #[inline]
    pub fn at(&self, level: usize, i: usize) -> &OutflowPoint<T> {
        &self.points[level * self.nx + i]
    }

    /// Level index closest to time `t`, clamped to the sampled range.
    pub fn level_for(&self, t: T) -> usize {
        let k = (t / self.dt).round().as_f64().max(0.0) as usize;
        k.min(self.levels - 1)
    }

    /// All ξ nodes of one time level.
    pub fn row(&self, level: usize) -> &[OutflowPoint<T>] {
        &self.points[level * self.nx..(level + 1) * self.nx]
    }

    pub fn points(&self) -> &[OutflowPoint<T>] {
        &self.points
    }
}

/// Samples the outflow recipe on every time level and ξ node.
pub fn sample_outflow<T: Real>(recipe: &OutflowRecipe, grid: &Grid<T>) -> Result<OutflowData<T>> {
    let levels = grid.n_steps + 1;
    let mut points = Vec::with_capacity(levels * grid.nx);
    for k in 0..levels {
        let t = grid.time(k).as_f64();
        for i in 0..grid.nx {
            let x = grid.xi(i).as_f64();
            let p = recipe.point(t, x)?;
            for (trace, value) in [("Theta", p.theta), ("H", p.h), ("P", p.p), ("theta_star", p.theta_star)] {
                if !(value > 0.0) {
                    return Err(Error::NonPositiveTrace { trace, t, xi: x, value });
                }
            }
            points.push(OutflowPoint::cast(&p));
        }
    }
    Ok(OutflowData {
        nx: grid.nx,
        levels,
        dt: grid.dt,
        points,
    })
}

/// Pointwise minima behind the admissibility decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub ok: bool,
    pub min_theta: T,
    pub min_q: T,
    pub min_p_minus_q: T,
    pub min_q_total: T,
    /// First node `(ξ index, η index)` in storage order violating a bound.
    pub first_violation: Option<(usize, usize)>,
}

/// Checks `theta ≥ δ` and `δ ≤ q ≤ P − δ` at every node.
pub fn validate_admissibility<T: Real>(
    v: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
) -> AdmissibilityReport<T> {
    let level = outflow.level_for(v.time);
    let delta = params.delta;
    let mut rep = AdmissibilityReport {
        ok: true,
        min_theta: T::infinity(),
        min_q: T::infinity(),
        min_p_minus_q: T::infinity(),
        min_q_total: T::infinity(),
        first_violation: None,
    };
    let neta = v.neta();
    for i in 0..v.nx() {
        let p = outflow.at(level, i).p;
        for j in 0..neta {
            let theta = v.theta.get(i, j);
            let q = v.q.get(i, j);
            let pmq = p - q;
            rep.min_theta = rep.min_theta.min(theta);
            rep.min_q = rep.min_q.min(q);
            rep.min_p_minus_q = rep.min_p_minus_q.min(pmq);
            rep.min_q_total = rep.min_q_total.min(params.q_total(p, q));
            let bad = !(theta >= delta && q >= delta && pmq >= delta);
            if bad && rep.first_violation.is_none() {
                rep.first_violation = Some((i, j));
            }
        }
    }
    rep.ok = rep.first_violation.is_none();
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid<f64> {
        make_grid(4, 8, 1.0, 0.1, 1.0).unwrap()
    }

    #[test]
    fn grid_spacing() {
        let g = unit_grid();
        assert!((g.d_xi - PI / 2.0).abs() < 1e-15);
        assert!((g.d_eta - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(g.n_steps, 10);
        let big = make_grid(64, 128, 20.0, 1e-3, 0.5).unwrap();
        assert_eq!(big.n_steps, 500);
    }

    #[test]
    fn grid_rejects_small_sizes() {
        assert!(matches!(make_grid(3, 8, 1.0, 0.1, 1.0), Err(Error::Sizing(_))));
        assert!(matches!(make_grid(4, 7, 1.0, 0.1, 1.0), Err(Error::Sizing(_))));
        assert!(make_grid(4, 8, 0.0, 0.1, 1.0).is_err());
        assert!(make_grid(4, 8, 1.0, -0.1, 1.0).is_err());
        assert!(make_grid(4, 8, 1.0, 0.1, 0.05).is_err());
        assert!(make_grid(4, 8, 1.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn params_ratio() {
        let p: Params<f64> = Params::new(1.0, 1.0, 1.0, 2.0, 3.0, 0.05).unwrap();
        assert!((p.a - 0.4).abs() < 1e-15);
        assert!(p.a > 0.0 && p.a < 1.0);
        assert!(Params::new(1.0, 0.0, 1.0, 1.0, 1.0, 0.05).is_err());
    }

    #[test]
    fn constant_outflow_has_zero_derivatives() {
        let g = unit_grid();
        let recipe = OutflowRecipe::Constant {
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            p: 1.0,
            theta_star: 1.0,
        };
        let out = sample_outflow(&recipe, &g).unwrap();
        assert_eq!(out.points().len(), 11 * 4);
        assert!(out.points().iter().all(|p| p.p_t == 0.0 && p.p_xi == 0.0));
    }

    #[test]
    fn negative_wall_temperature_rejected() {
        let g = unit_grid();
        let recipe = OutflowRecipe::Constant {
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            p: 1.0,
            theta_star: -1.0,
        };
        assert!(matches!(
            sample_outflow(&recipe, &g),
            Err(Error::NonPositiveTrace {
                trace: "theta_star",
                ..
            })
        ));
    }

    #[test]
    fn pressure_gradient_matches_centered_difference() {
        let g: Grid<f64> = make_grid(32, 8, 1.0, 0.1, 0.2).unwrap();
        let recipe = OutflowRecipe::expressions("0", "1", "1", "1 + 0.1*sin(x)", "1").unwrap();
        let out = sample_outflow(&recipe, &g).unwrap();
        for i in 0..g.nx {
            let ip = (i + 1) % g.nx;
            let im = (i + g.nx - 1) % g.nx;
            let centered = (out.at(0, ip).p - out.at(0, im).p) / (2.0 * g.d_xi);
            let exact = 0.1 * g.xi(i).cos();
            let sampled = out.at(0, i).p_xi;
            // sampled derivative is exact to ~1e-10, the grid difference to O(dξ²)
            assert!((sampled - exact).abs() < 1e-9);
            assert!((centered - sampled).abs() < 0.1 * g.d_xi * g.d_xi);
        }
    }

    fn constant_state(g: &Grid<f64>, theta: f64, q: f64) -> State<f64> {
        State::constant(g, Vec3::new(0.0, theta, q), 0.0)
    }

    fn unit_outflow(g: &Grid<f64>) -> OutflowData<f64> {
        let recipe = OutflowRecipe::Constant {
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            p: 1.0,
            theta_star: 1.0,
        };
        sample_outflow(&recipe, g).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let g = unit_grid();
        let out = unit_outflow(&g);
        let params = Params::unit(0.1);
        let rep = validate_admissibility(&constant_state(&g, 1.0, 0.5), &out, &params);
        assert!(rep.ok);
        assert_eq!(rep.min_p_minus_q, 0.5);

        let rep = validate_admissibility(&constant_state(&g, 1.0, 0.95), &out, &params);
        assert!(!rep.ok);

        let mut s = constant_state(&g, 1.0, 0.5);
        s.theta.set(2, 5, 0.05);
        let before = s.clone();
        let rep = validate_admissibility(&s, &out, &params);
        assert!(!rep.ok);
        assert_eq!(rep.first_violation, Some((2, 5)));
        assert_eq!(rep.min_theta, 0.05);
        assert_eq!(s, before);
        assert_eq!(validate_admissibility(&s, &out, &params), rep);
    }
}
