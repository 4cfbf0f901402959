//! Manufactured solutions for the transformed system.
//!
//! Every case has the form
//!
//! ```text
//! u1 = U (1 − E) + A_u G m,   θ = Θ + (θ* − Θ) E + A_θ G m,   q = H²/2 + A_q K m
//! ```
//!
//! with `E = exp(−s²)`, `G = s² E`, `K = (1 + s²) E`, `s = η / w`, and the modulation
//! `m = 1 + α sin(ξ − cτ) + β sin(ωτ)`. These satisfy `u1 = 0`, `θ = θ*` and
//! `∂η q = 0` at the wall and decay to `v∞` like a Gaussian.

use std::io::Write;

use rayon::prelude::*;

use crate::coeffs::{eval_advection, eval_diffusion, eval_lower_order, Vec3};
use crate::diagnostics::{discrete_norm, NormSpec};
use crate::error::{Error, Result};
use crate::fields::{
    make_grid, sample_outflow, validate_admissibility, Grid, OutflowData, OutflowRecipe, Params, State,
};
use crate::picard::{picard_solve, AdmissibilityPolicy, PicardConfig};
use crate::scalar::Real;
use crate::stepper::Forcing;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Constant,
    Advection,
    LowerOrder,
    Diffusion,
}

impl CaseKind {
    pub const ALL: [CaseKind; 4] = [
        CaseKind::Constant,
        CaseKind::Advection,
        CaseKind::LowerOrder,
        CaseKind::Diffusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Constant => "constant",
            CaseKind::Advection => "advection",
            CaseKind::LowerOrder => "lower-order",
            CaseKind::Diffusion => "diffusion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown manufactured case `{s}`")))
    }
}

/// A closed-form exact solution with its outer data and parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub params: Params<f64>,
    pub u: f64,
    pub theta: f64,
    pub h: f64,
    pub theta_star: f64,
    /// `P = p0 + p_amp sin ξ`.
    pub p0: f64,
    pub p_amp: f64,
    pub width: f64,
    /// `(A_u, A_θ, A_q)`.
    pub amp: [f64; 3],
    pub alpha: f64,
    pub speed: f64,
    pub beta: f64,
    pub omega: f64,
    pub eta_max: f64,
    pub t_end: f64,
}

/// Exact values and derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactPoint {
    pub v: Vec3<f64>,
    pub v_t: Vec3<f64>,
    pub v_xi: Vec3<f64>,
    pub v_eta: Vec3<f64>,
    pub v_etaeta: Vec3<f64>,
}

impl ManufacturedCase {
    pub fn new(kind: CaseKind) -> Self {
        let base = ManufacturedCase {
            kind,
            params: Params::unit(0.05),
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            theta_star: 1.0,
            p0: 2.0,
            p_amp: 0.0,
            width: 1.0,
            amp: [0.0; 3],
            alpha: 0.0,
            speed: 0.0,
            beta: 0.0,
            omega: 0.0,
            eta_max: 8.0,
            t_end: 0.25,
        };
        let diffusivity = |s: f64| Params::new(s, s, s, 1.0, 1.0, 0.05).expect("valid parameters");
        match kind {
            CaseKind::Constant => base,
            CaseKind::Advection => ManufacturedCase {
                params: diffusivity(0.05),
                u: 1.0,
                theta_star: 1.2,
                amp: [0.5, 0.3, 0.2],
                alpha: 0.5,
                speed: 1.0,
                beta: 0.4,
                omega: 6.0,
                ..base
            },
            CaseKind::LowerOrder => ManufacturedCase {
                params: diffusivity(0.3),
                u: 0.5,
                theta: 1.2,
                theta_star: 0.8,
                h: 1.1,
                p_amp: 0.3,
                width: 0.8,
                amp: [0.4, 0.4, 0.25],
                alpha: 0.3,
                speed: 0.5,
                beta: 0.4,
                omega: 10.0,
                ..base
            },
            CaseKind::Diffusion => ManufacturedCase {
                params: diffusivity(1.0),
                u: 0.3,
                theta_star: 1.3,
                amp: [0.3, 0.3, 0.2],
                alpha: 0.2,
                speed: 0.5,
                beta: 0.5,
                omega: 10.0,
                ..base
            },
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn outflow_recipe(&self) -> Result<OutflowRecipe> {
        if self.p_amp == 0.0 {
            return Ok(OutflowRecipe::Constant {
                u: self.u,
                theta: self.theta,
                h: self.h,
                p: self.p0,
                theta_star: self.theta_star,
            });
        }
        OutflowRecipe::expressions(
            &format!("{:?}", self.u),
            &format!("{:?}", self.theta),
            &format!("{:?}", self.h),
            &format!("{:?} + {:?} * sin(x)", self.p0, self.p_amp),
            &format!("{:?}", self.theta_star),
        )
    }

    pub fn exact(&self, t: f64, xi: f64, eta: f64) -> ExactPoint {
        let w = self.width;
        let s = eta / w;
        let e = (-s * s).exp();
        let (s2, s4) = (s * s, s * s * s * s);
        // E, G, K and their first and second s-derivatives
        let ep = [e, -2.0 * s * e, (4.0 * s2 - 2.0) * e];
        let gp = [s2 * e, (2.0 * s - 2.0 * s * s2) * e, (2.0 - 10.0 * s2 + 4.0 * s4) * e];
        let kp = [(1.0 + s2) * e, -2.0 * s * s2 * e, (4.0 * s4 - 6.0 * s2) * e];

        let phase = xi - self.speed * t;
        let m = 1.0 + self.alpha * phase.sin() + self.beta * (self.omega * t).sin();
        let m_t = -self.alpha * self.speed * phase.cos() + self.beta * self.omega * (self.omega * t).cos();
        let m_xi = self.alpha * phase.cos();

        let [au, ath, aq] = self.amp;
        let dth = self.theta_star - self.theta;
        let q_inf = self.h * self.h / 2.0;
        let prof = |k: usize| {
            let sc = w.powi(-(k as i32));
            Vec3([
                sc * (-self.u * ep[k] + au * gp[k] * m),
                sc * (dth * ep[k] + ath * gp[k] * m),
                sc * (aq * kp[k] * m),
            ])
        };
        ExactPoint {
            v: Vec3([
                self.u * (1.0 - e) + au * gp[0] * m,
                self.theta + dth * e + ath * gp[0] * m,
                q_inf + aq * kp[0] * m,
            ]),
            v_t: Vec3([au * gp[0] * m_t, ath * gp[0] * m_t, aq * kp[0] * m_t]),
            v_xi: Vec3([au * gp[0] * m_xi, ath * gp[0] * m_xi, aq * kp[0] * m_xi]),
            v_eta: prof(1),
            v_etaeta: prof(2),
        }
    }

    /// The exact solution sampled on `grid` at `time`.
    pub fn exact_state<T: Real>(&self, grid: &Grid<T>, time: T) -> State<T> {
        let t = time.as_f64();
        State::from_fn(grid, time, |i, j| {
            let v = self.exact(t, grid.xi(i).as_f64(), grid.eta(j).as_f64()).v;
            Vec3(v.0.map(T::lit))
        })
    }

    pub fn params<T: Real>(&self) -> Params<T> {
        let p = &self.params;
        Params::new(
            T::lit(p.mu),
            T::lit(p.kappa),
            T::lit(p.nu),
            T::lit(p.r_gas),
            T::lit(p.c_v),
            T::lit(p.delta),
        )
        .expect("case parameters are valid")
    }
}

/// `s = ∂τv + A∂ξv + f + g − B∂η²v` of the exact solution at every node of `level`,
/// with the outer pressure data the solver sees.
pub fn manufacture_source<T: Real>(
    case: &ManufacturedCase,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    level: usize,
) -> Result<Vec<Vec3<T>>> {
    let t = grid.time(level).as_f64();
    let c = |v: Vec3<f64>| Vec3(v.0.map(T::lit));
    let mut out = Vec::with_capacity(grid.nodes());
    for i in 0..grid.nx {
        let op = outflow.at(level, i);
        for j in 0..grid.neta {
            let ex = case.exact(t, grid.xi(i).as_f64(), grid.eta(j).as_f64());
            let v = c(ex.v);
            let a = eval_advection(v, op.p, params)?;
            let b = eval_diffusion(v, op.p, params)?;
            let lo = eval_lower_order(v, c(ex.v_eta), op.p, op.p_t, op.p_xi, params)?;
            out.push(c(ex.v_t) + a * c(ex.v_xi) + lo.f + lo.g - b * c(ex.v_etaeta));
        }
    }
    Ok(out)
}

/// Supplies the manufactured source to the solver level by level.
pub struct CaseForcing<'a, T> {
    pub case: &'a ManufacturedCase,
    pub outflow: &'a OutflowData<T>,
    pub params: Params<T>,
}

impl<T: Real> Forcing<T> for CaseForcing<'_, T> {
    fn sample(&self, grid: &Grid<T>, level: usize) -> Result<Vec<Vec3<T>>> {
        manufacture_source(self.case, self.outflow, &self.params, grid, level)
    }
}

/// How `dt` follows the grid under refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyMode {
    /// `dt ∝ dη²`, design order 2.
    Spatial,
    /// `dt ∝ dη`, design order 1.
    Temporal,
}

impl StudyMode {
    pub fn name(self) -> &'static str {
        match self {
            StudyMode::Spatial => "spatial",
            StudyMode::Temporal => "temporal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub nx: usize,
    pub neta: usize,
    pub dt: f64,
}

/// `levels` resolutions starting at 16 × 32 and doubling, with `dt` tied to `dη` per `mode`.
pub fn default_resolutions(case: &ManufacturedCase, mode: StudyMode, levels: usize) -> Vec<Resolution> {
    (0..levels)
        .map(|l| {
            let (nx, neta) = (16 << l, 32 << l);
            let h = case.eta_max / (neta - 1) as f64;
            let target = match mode {
                StudyMode::Spatial => 0.25 * h * h,
                StudyMode::Temporal => 0.35 * h,
            };
            let steps = (case.t_end / target).ceil().max(1.0);
            Resolution {
                nx,
                neta,
                dt: case.t_end / steps,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub resolution: Resolution,
    pub d_eta: f64,
    /// Final-time L² error of `(u1, θ, q)`.
    pub errors: [f64; 3],
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub case: &'static str,
    pub mode: StudyMode,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `log err` against `log dη`, per component.
    pub orders: [f64; 3],
    /// All errors at rounding level; orders are then meaningless.
    pub exact: bool,
    /// Errors decrease at every refinement for every component.
    pub monotone: bool,
}

impl StudyResult {
    /// Whether every component's order lies within `tol` of `target`, or the case is exact.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        self.exact || self.orders.iter().all(|o| (o - target).abs() <= tol)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            "case",
            "nx",
            "neta",
            "dt",
            "err_u1",
            "err_theta",
            "err_q",
            "order_u1",
            "order_theta",
            "order_q",
        ])
        .map_err(io)?;
        for (k, row) in self.rows.iter().enumerate() {
            let local = |c: usize| match k {
                0 => String::new(),
                _ => {
                    let prev = &self.rows[k - 1];
                    let o = (prev.errors[c] / row.errors[c]).ln() / (prev.d_eta / row.d_eta).ln();
                    format!("{o:.4}")
                }
            };
            w.write_record([
                self.case.to_string(),
                row.resolution.nx.to_string(),
                row.resolution.neta.to_string(),
                format!("{:e}", row.resolution.dt),
                format!("{:e}", row.errors[0]),
                format!("{:e}", row.errors[1]),
                format!("{:e}", row.errors[2]),
                local(0),
                local(1),
                local(2),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Solves the case at one resolution and returns the final-time errors.
pub fn solve_case(case: &ManufacturedCase, res: Resolution, tol: f64) -> Result<StudyRow> {
    let grid = make_grid(res.nx, res.neta, case.eta_max, res.dt, case.t_end)?;
    let recipe = case.outflow_recipe()?;
    let outflow = sample_outflow(&recipe, &grid)?;
    let params = case.params::<f64>();
    let v0 = case.exact_state(&grid, 0.0);
    let forcing = CaseForcing {
        case,
        outflow: &outflow,
        params,
    };
    let config = PicardConfig {
        tol,
        max_iter: 60,
        compat_order: 1,
        on_admissibility_loss: AdmissibilityPolicy::Abort,
    };
    let (traj, report) = picard_solve(&v0, &outflow, &params, &grid, &config, Some(&forcing))?;
    let last = traj.last().expect("trajectory has levels");
    let exact = case.exact_state(&grid, last.time);
    let diff = last.sub(&exact);
    let mut errors = [0.0; 3];
    for (c, f) in diff.components().into_iter().enumerate() {
        errors[c] = discrete_norm(f, NormSpec::L2, &grid)?;
    }
    Ok(StudyRow {
        resolution: res,
        d_eta: grid.d_eta,
        errors,
        iterations: report.iterations(),
        converged: report.converged(),
    })
}

/// Runs the case at each resolution and fits the observed order.
pub fn convergence_study(case: &ManufacturedCase, resolutions: &[Resolution], mode: StudyMode) -> Result<StudyResult> {
    if resolutions.len() < 3 {
        return Err(Error::Empty(format!(
            "{} resolutions (at least 3 needed)",
            resolutions.len()
        )));
    }
    let rows = resolutions
        .par_iter()
        .map(|&r| solve_case(case, r, 1e-11))
        .collect::<Result<Vec<_>>>()?;
    let logh: Vec<f64> = rows.iter().map(|r| r.d_eta.ln()).collect();
    let mut orders = [0.0; 3];
    for (c, o) in orders.iter_mut().enumerate() {
        let loge: Vec<f64> = rows.iter().map(|r| r.errors[c].max(f64::MIN_POSITIVE).ln()).collect();
        *o = lsq_slope(&logh, &loge);
    }
    let exact = rows.iter().all(|r| r.errors.iter().all(|&e| e < 1e-12));
    let monotone = rows.windows(2).all(|w| (0..3).all(|c| w[1].errors[c] < w[0].errors[c]));
    Ok(StudyResult {
        case: case.name(),
        mode,
        rows,
        orders,
        exact,
        monotone,
    })
}

/// Checks that the exact solution stays admissible with margin `2δ` on every level of `grid`.
pub fn check_case_admissible(case: &ManufacturedCase, grid: &Grid<f64>) -> Result<()> {
    let outflow = sample_outflow(&case.outflow_recipe()?, grid)?;
    let strict = Params {
        delta: 2.0 * case.params.delta,
        ..case.params
    };
    for k in 0..=grid.n_steps {
        let rep = validate_admissibility(&case.exact_state(grid, grid.time(k)), &outflow, &strict);
        if !rep.ok {
            return Err(Error::Inadmissible(format!(
                "case {} leaves the admissible set at level {k}, node {:?}",
                case.name(),
                rep.first_violation
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_derivatives_match_differences() {
        let case = ManufacturedCase::new(CaseKind::LowerOrder);
        let (t, x, e) = (0.1, 0.7, 0.9);
        let h = 1e-5;
        let p = case.exact(t, x, e);
        let d = |f: &dyn Fn(f64) -> Vec3<f64>| (f(h) - f(-h)).scale(0.5 / h);
        let fd_t = d(&|s| case.exact(t + s, x, e).v);
        let fd_x = d(&|s| case.exact(t, x + s, e).v);
        let fd_e = d(&|s| case.exact(t, x, e + s).v);
        let fd_ee = d(&|s| case.exact(t, x, e + s).v_eta);
        for (a, b) in [(fd_t, p.v_t), (fd_x, p.v_xi), (fd_e, p.v_eta), (fd_ee, p.v_etaeta)] {
            assert!((a - b).max_abs() < 1e-8, "{a:?} {b:?}");
        }
    }

    #[test]
    fn wall_conditions_hold() {
        for kind in CaseKind::ALL {
            let case = ManufacturedCase::new(kind);
            let p = case.exact(0.2, 1.3, 0.0);
            assert_eq!(p.v[0], 0.0);
            assert!((p.v[1] - case.theta_star).abs() < 1e-15);
            assert_eq!(p.v_eta[2], 0.0);
        }
    }

    #[test]
    fn constant_case_has_zero_source() {
        let case = ManufacturedCase::new(CaseKind::Constant);
        let g: Grid<f64> = make_grid(8, 16, case.eta_max, 0.05, case.t_end).unwrap();
        let out = sample_outflow(&case.outflow_recipe().unwrap(), &g).unwrap();
        let s = manufacture_source(&case, &out, &case.params, &g, 2).unwrap();
        assert!(s.iter().all(|v| v.max_abs() == 0.0));
    }
}
