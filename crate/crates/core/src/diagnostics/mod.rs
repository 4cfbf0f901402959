//! Norms, energies, residuals and consistency checks.

pub mod identities;
pub mod norms;

pub use identities::{identity_suite, IdentityReport};
pub use norms::{discrete_norm, state_norm, trajectory_norm, NormSpec};

use crate::coeffs::{symmetrizer_matrix, symmetrizer_min_eigenvalue, Vec3};
use crate::error::{Error, Result};
use crate::fields::{validate_admissibility, Field, Grid, OutflowData, Params, State};
use crate::scalar::Real;
use crate::stepper::{spatial_operator, Forcing};
use norms::{eta_weight, mixed_derivative, multi_indices};

/// Max and L² size of one residual component.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationResidual<T> {
    pub name: String,
    pub max: T,
    pub l2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    pub equations: Vec<EquationResidual<T>>,
    /// `max |∂x h1 + ∂y h2|` on the physical side.
    pub divergence: Option<T>,
    /// `max |Rρθ + h1²/2 − P|` on the physical side.
    pub pressure: Option<T>,
    pub time: T,
}

impl<T: Real> ResidualReport<T> {
    pub fn max(&self) -> T {
        self.equations.iter().map(|e| e.max).fold(T::zero(), T::max)
    }
}

/// `Σ_{|α| ≤ k} ⟨∂^α w, S(v_frozen) ∂^α w⟩` with `w = v − v̄`.
pub fn energy_functional<T: Real>(
    v: &State<T>,
    vbar: &State<T>,
    v_frozen: &State<T>,
    spec: NormSpec,
    grid: &Grid<T>,
    params: &Params<T>,
    outflow: &OutflowData<T>,
) -> Result<T> {
    if spec.k > 2 || spec.time {
        return Err(Error::Unsupported("energy with k > 2 or time derivatives".into()));
    }
    let adm = validate_admissibility(v_frozen, outflow, params);
    if !adm.ok {
        return Err(Error::Inadmissible(format!(
            "frozen state violates the bounds at node {:?}",
            adm.first_violation
        )));
    }
    let s = symmetrizer_field(v_frozen, outflow, params, grid)?;
    let w = v.sub(vbar);
    let mut total = T::zero();
    for (a, b) in multi_indices(spec.k) {
        let d = w.components().map(|f| mixed_derivative(f, a, b, grid));
        for i in 0..grid.nx {
            for j in 0..grid.neta {
                let x = Vec3(d.each_ref().map(|f| f.get(i, j)));
                total = total + eta_weight(j, grid) * x.dot(s[grid.idx(i, j)] * x);
            }
        }
    }
    Ok(total * grid.d_xi)
}

fn symmetrizer_field<T: Real>(
    v: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
) -> Result<Vec<crate::coeffs::Mat3<T>>> {
    let level = outflow.level_for(v.time);
    let mut out = Vec::with_capacity(grid.nodes());
    for i in 0..grid.nx {
        let p = outflow.at(level, i).p;
        for j in 0..grid.neta {
            out.push(symmetrizer_matrix(v.at(i, j), p, params)?);
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of `S(v)` over the grid.
pub fn symmetrizer_floor<T: Real>(
    v: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
) -> Result<T> {
    Ok(symmetrizer_field(v, outflow, params, grid)?
        .iter()
        .map(symmetrizer_min_eigenvalue)
        .fold(T::infinity(), T::min))
}

const COMPONENTS: [&str; 3] = ["u1", "theta", "q"];

/// Residual of the nonlinear transformed system at interior nodes,
/// `(vᵏ − vᵏ⁻¹)/dt + A∂ξvᵏ + f + g − B∂η²vᵏ − sᵏ`, over all levels `k ≥ 1`.
///
/// `max` is over nodes and levels; `l2` is the largest spatial L² norm over levels.
pub fn residual_transformed<T: Real>(
    traj: &[State<T>],
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<ResidualReport<T>> {
    if traj.len() < 2 {
        return Err(Error::MissingTimeLevel("residual needs two time levels".into()));
    }
    let mut max = [T::zero(); 3];
    let mut l2 = [T::zero(); 3];
    for k in 1..traj.len() {
        let level = outflow.level_for(traj[k].time);
        let rhs = spatial_operator(&traj[k], outflow.row(level), params, grid)?;
        let source = forcing.map(|f| f.sample(grid, level)).transpose()?;
        let mut sq = [T::zero(); 3];
        for i in 0..grid.nx {
            for j in 1..grid.neta - 1 {
                let idx = grid.idx(i, j);
                let mut r = (traj[k].at_index(idx) - traj[k - 1].at_index(idx)).scale(T::one() / grid.dt) - rhs[idx];
                if let Some(s) = &source {
                    r = r - s[idx];
                }
                for c in 0..3 {
                    max[c] = max[c].max(r[c].abs());
                    sq[c] = sq[c] + grid.d_eta * r[c] * r[c];
                }
            }
        }
        for c in 0..3 {
            l2[c] = l2[c].max((sq[c] * grid.d_xi).sqrt());
        }
    }
    Ok(ResidualReport {
        equations: (0..3)
            .map(|c| EquationResidual {
                name: COMPONENTS[c].to_string(),
                max: max[c],
                l2: l2[c],
            })
            .collect(),
        divergence: None,
        pressure: None,
        time: traj[traj.len() - 1].time,
    })
}

/// Residuals of the three trace equations the outer flow must satisfy at the wall.
#[derive(Clone, Debug, PartialEq)]
pub struct OutflowResiduals<T> {
    /// Residual triple at each sampled `(level, ξ)`, level-major.
    pub values: Vec<[T; 3]>,
    pub max: [T; 3],
}

/// Evaluates, at every sampled point,
///
/// ```text
/// U_t + U U_x − RΘH/(P − H²/2) H_x + R P_x Θ/(P − H²/2)
/// Θ_t + U Θ_x + aΘH²/Q̃ U_x − a(P_t + P_x U)Θ/Q̃
/// H_t + U H_x − (P − H²/2)H/Q̃ U_x − (1 − a)(P_t + P_x U)H/Q̃
/// ```
///
/// with `Q̃ = P + (1 − 2a)H²/2`.
pub fn outflow_consistency<T: Real>(outflow: &OutflowData<T>, params: &Params<T>) -> Result<OutflowResiduals<T>> {
    let (r, a) = (params.r_gas, params.a);
    let half = T::lit(0.5);
    let mut values = Vec::with_capacity(outflow.points().len());
    let mut max = [T::zero(); 3];
    for op in outflow.points() {
        let q = half * op.h * op.h;
        let pmq = op.p - q;
        if !(pmq >= T::degeneracy_floor()) {
            return Err(Error::Degenerate {
                quantity: "P - H^2/2",
                value: pmq.as_f64(),
            });
        }
        let qt = params.q_total(op.p, q);
        if !(qt >= T::degeneracy_floor()) {
            return Err(Error::Degenerate {
                quantity: "P + (1 - 2a) H^2/2",
                value: qt.as_f64(),
            });
        }
        let drift = op.p_t + op.p_xi * op.u;
        let res = [
            op.u_t + op.u * op.u_xi - r * op.theta * op.h / pmq * op.h_xi + r * op.p_xi * op.theta / pmq,
            op.theta_t + op.u * op.theta_xi + a * op.theta * op.h * op.h / qt * op.u_xi - a * drift * op.theta / qt,
            op.h_t + op.u * op.h_xi - pmq * op.h / qt * op.u_xi - (T::one() - a) * drift * op.h / qt,
        ];
        for c in 0..3 {
            max[c] = max[c].max(res[c].abs());
        }
        values.push(res);
    }
    Ok(OutflowResiduals { values, max })
}

/// Both sides of `‖f(·,0)‖_{L²(𝕋)} ≤ √2 ‖f‖^{1/2} ‖∂η f‖^{1/2}`.
///
/// The field must decay: `|f(·, eta_max)| < 1e-6 · max |f|`.
pub fn trace_check<T: Real>(field: &Field<T>, grid: &Grid<T>) -> Result<(T, T)> {
    let peak = field.max_abs();
    if peak == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    let last = grid.neta - 1;
    let edge = (0..grid.nx).map(|i| field.get(i, last).abs()).fold(T::zero(), T::max);
    if !(edge < T::lit(1e-6) * peak) {
        return Err(Error::Decay {
            edge: edge.as_f64(),
            peak: peak.as_f64(),
        });
    }
    let wall: T = (0..grid.nx).map(|i| field.get(i, 0).powi(2)).sum::<T>() * grid.d_xi;
    let f = discrete_norm(field, NormSpec::L2, grid)?;
    let df = discrete_norm(&mixed_derivative(field, 0, 1, grid), NormSpec::L2, grid)?;
    Ok((wall.sqrt(), T::lit(2.0).sqrt() * (f * df).sqrt()))
}

/// The decaying fields the trace inequality is checked on.
pub fn trace_test_fields<T: Real>(grid: &Grid<T>) -> Vec<(&'static str, Field<T>)> {
    let (nx, n) = (grid.nx, grid.neta);
    let em = grid.eta_max;
    vec![
        ("exp(-eta)", Field::from_fn(nx, n, |_, j| (-grid.eta(j)).exp())),
        (
            "(1 + sin xi) exp(-eta^2)",
            Field::from_fn(nx, n, |i, j| {
                (T::one() + grid.xi(i).sin()) * (-grid.eta(j).powi(2)).exp()
            }),
        ),
        (
            "cos(2 xi) (1 + eta) exp(-eta)",
            Field::from_fn(nx, n, |i, j| {
                let e = grid.eta(j);
                (T::lit(2.0) * grid.xi(i)).cos() * (T::one() + e) * (-e).exp()
            }),
        ),
        (
            "(1 - eta/eta_max) sin xi",
            Field::from_fn(nx, n, |i, j| {
                let w = if j == n - 1 {
                    T::zero()
                } else {
                    T::one() - grid.eta(j) / em
                };
                w * grid.xi(i).sin()
            }),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample_outflow, OutflowRecipe};
    use std::f64::consts::PI;

    fn outflow(g: &Grid<f64>) -> OutflowData<f64> {
        let recipe = OutflowRecipe::Constant {
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            p: 2.0,
            theta_star: 1.0,
        };
        sample_outflow(&recipe, g).unwrap()
    }

    #[test]
    fn energy_matches_direct_quadratic_form() {
        let g: Grid<f64> = make_grid(6, 10, 3.0, 0.1, 0.2).unwrap();
        let out = outflow(&g);
        let p = Params::unit(0.05);
        let frozen = State::constant(&g, Vec3([0.2, 1.5, 0.6]), 0.0);
        let vbar = State::constant(&g, Vec3([0.0, 1.0, 0.5]), 0.0);
        let v = State::from_fn(&g, 0.0, |i, j| {
            Vec3([0.1 * j as f64, 1.0 + 0.05 * i as f64, 0.5 + 0.01 * j as f64])
        });
        let e = energy_functional(&v, &vbar, &frozen, NormSpec::L2, &g, &p, &out).unwrap();
        let s = symmetrizer_matrix(Vec3([0.2, 1.5, 0.6]), 2.0, &p).unwrap();
        let mut direct = 0.0;
        for i in 0..6 {
            for j in 0..10 {
                let w = v.at(i, j) - vbar.at(i, j);
                direct += eta_weight(j, &g) * g.d_xi * w.dot(s * w);
            }
        }
        assert!((e - direct).abs() < 1e-13 * direct.abs());
        assert_eq!(
            energy_functional(&vbar, &vbar, &frozen, NormSpec::h(1), &g, &p, &out).unwrap(),
            0.0
        );
        let floor = symmetrizer_floor(&frozen, &out, &p, &g).unwrap();
        let l2 = state_norm(&v.sub(&vbar), NormSpec::L2, &g).unwrap();
        assert!(e >= floor * l2 * l2);
    }

    #[test]
    fn trace_of_exponential() {
        let g: Grid<f64> = make_grid(16, 256, 20.0, 0.1, 0.2).unwrap();
        let f = Field::from_fn(16, 256, |_, j| (-g.eta(j)).exp());
        let (lhs, rhs) = trace_check(&f, &g).unwrap();
        assert!((lhs - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(lhs <= rhs * 1.05);
        let slow = Field::from_fn(16, 256, |_, j| (-0.1 * g.eta(j)).exp());
        assert!(matches!(trace_check(&slow, &g), Err(Error::Decay { .. })));
        assert_eq!(trace_check(&Field::zeros(16, 256), &g).unwrap(), (0.0, 0.0));
    }
}
