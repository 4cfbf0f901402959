//! Picard iteration on the transformed system: background field, compatibility
//! data, zeroth approximation and the frozen-coefficient iterates `vⁿ`.

use crate::coeffs::Vec3;
use crate::diagnostics::norms::{state_norm, sup_distance, NormSpec};
use crate::error::{Error, Result};
use crate::fields::{validate_admissibility, Grid, OutflowData, Params, State};
use crate::scalar::Real;
use crate::stepper::{apply_bcs, solve_linear_problem, spatial_operator, Forcing};

/// Cutoff `φ`: zero on `[0, 1]`, one from 2 on, quintic smoothstep in between.
pub fn cutoff_phi<T: Real>(eta: T) -> Result<T> {
    if !(eta >= T::zero()) {
        return Err(Error::OutOfRange(format!("cutoff evaluated at eta = {eta}")));
    }
    Ok(smoothstep(eta - T::one()))
}

fn smoothstep<T: Real>(s: T) -> T {
    if s <= T::zero() {
        T::zero()
    } else if s >= T::one() {
        T::one()
    } else {
        s * s * s * (s * (s * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
    }
}

/// `v̄ = (φU, φΘ + (1 − φ)θ*, H²/2)` at every stored level.
#[derive(Clone, Debug)]
pub struct Background<T> {
    pub vbar: Vec<State<T>>,
    /// `φ(η_j)`.
    pub phi: Vec<T>,
    /// `∂τ v̄` at `τ = 0`, from the sampled trace derivatives.
    pub dvbar_dt0: State<T>,
}

impl<T: Real> Background<T> {
    /// `v∞ = (U, Θ, H²/2)` at a level and ξ node.
    pub fn vinf(outflow: &OutflowData<T>, level: usize, i: usize) -> Vec3<T> {
        outflow.at(level, i).v_inf()
    }
}

pub fn build_background<T: Real>(outflow: &OutflowData<T>, grid: &Grid<T>) -> Background<T> {
    let phi: Vec<T> = (0..grid.neta).map(|j| smoothstep(grid.eta(j) - T::one())).collect();
    let vbar = (0..=grid.n_steps)
        .map(|k| {
            State::from_fn(grid, grid.time(k), |i, j| {
                let op = outflow.at(k, i);
                let f = phi[j];
                Vec3([
                    f * op.u,
                    f * op.theta + (T::one() - f) * op.theta_star,
                    op.h * op.h / T::lit(2.0),
                ])
            })
        })
        .collect();
    let dvbar_dt0 = State::from_fn(grid, T::zero(), |i, j| {
        let op = outflow.at(0, i);
        let f = phi[j];
        Vec3([
            f * op.u_t,
            f * op.theta_t + (T::one() - f) * op.theta_star_t,
            op.h * op.h_t,
        ])
    });
    Background { vbar, phi, dvbar_dt0 }
}

/// Time derivatives `v₀ʲ = ∂τʲ v(0)` obtained from the equations, `j = 0..=J`.
#[derive(Clone, Debug)]
pub struct CompatibilitySet<T> {
    pub terms: Vec<State<T>>,
}

impl<T: Real> CompatibilitySet<T> {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }
}

/// Builds `v₀⁰ = v0` and, for `order = 1`, `v₀¹ = −A∂ξv₀ − f − g + B∂η²v₀ + s(0)`.
pub fn compatibility_derivatives<T: Real>(
    v0: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    order: usize,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<CompatibilitySet<T>> {
    if order > 1 {
        return Err(Error::Unsupported(format!(
            "compatibility order {order} (0 or 1 supported)"
        )));
    }
    let adm = validate_admissibility(v0, outflow, params);
    if !adm.ok {
        return Err(Error::Inadmissible(format!(
            "initial data violates the admissibility bounds at node {:?}",
            adm.first_violation
        )));
    }
    let mut terms = vec![v0.clone()];
    if order == 1 {
        let mut rhs = spatial_operator(v0, outflow.row(0), params, grid)?;
        if let Some(f) = forcing {
            for (r, s) in rhs.iter_mut().zip(f.sample(grid, 0)?) {
                *r = *r + s;
            }
        }
        terms.push(State::from_fn(grid, T::zero(), |i, j| rhs[grid.idx(i, j)]));
    }
    Ok(CompatibilitySet { terms })
}

/// `v⁰(τ) = v̄(τ) + Σ_{j ≤ J} τʲ/j! (v₀ʲ − ∂τʲ v̄(0))`, with boundary rows reimposed for `τ > 0`.
pub fn build_zeroth_approx<T: Real>(
    bg: &Background<T>,
    comp: &CompatibilitySet<T>,
    outflow: &OutflowData<T>,
    grid: &Grid<T>,
) -> Vec<State<T>> {
    let v0 = &comp.terms[0];
    let mut traj = vec![v0.clone()];
    for k in 1..=grid.n_steps {
        let tau = grid.time(k);
        let vbar = &bg.vbar[k];
        let vbar0 = &bg.vbar[0];
        let mut v = State::from_fn(grid, tau, |i, j| vbar.at(i, j) + v0.at(i, j) - vbar0.at(i, j));
        if let Some(v1) = comp.terms.get(1) {
            for idx in 0..grid.nodes() {
                let corr = (v1.at_index(idx) - bg.dvbar_dt0.at_index(idx)).scale(tau);
                let (i, j) = (idx / grid.neta, idx % grid.neta);
                v.set(i, j, v.at(i, j) + corr);
            }
        }
        traj.push(apply_bcs(&v, outflow, grid));
    }
    traj
}

/// What to do when an iterate leaves the admissible set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibilityPolicy {
    Abort,
    Continue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardConfig<T> {
    pub tol: T,
    pub max_iter: usize,
    pub compat_order: usize,
    pub on_admissibility_loss: AdmissibilityPolicy,
}

impl<T: Real> Default for PicardConfig<T> {
    fn default() -> Self {
        PicardConfig {
            tol: T::lit(1e-8),
            max_iter: 30,
            compat_order: 1,
            on_admissibility_loss: AdmissibilityPolicy::Abort,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PicardStatus {
    Converged,
    MaxIterations,
    AdmissibilityLost,
}

/// Diagnostics of one iterate `vⁿ`; `n = 0` is the zeroth approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterateRecord<T> {
    pub n: usize,
    /// `sup_τ ‖vⁿ − vⁿ⁻¹‖_{L²}`, absent for `n = 0`.
    pub distance: Option<T>,
    /// `dₙ / dₙ₋₁`, present from `n = 2`.
    pub ratio: Option<T>,
    pub admissible: bool,
    pub min_theta: T,
    pub min_q: T,
    pub min_p_minus_q: T,
    /// `sup_τ ‖vⁿ − v̄‖_{H¹}`.
    pub h1_norm: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport<T> {
    pub records: Vec<IterateRecord<T>>,
    pub status: PicardStatus,
}

impl<T: Real> IterationReport<T> {
    pub fn converged(&self) -> bool {
        self.status == PicardStatus::Converged
    }

    /// Number of linear solves performed.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last_distance(&self) -> Option<T> {
        self.records.last().and_then(|r| r.distance)
    }

    pub fn worst_ratio(&self) -> Option<T> {
        self.records.iter().filter_map(|r| r.ratio).reduce(T::max)
    }

    pub fn all_admissible(&self) -> bool {
        self.records.iter().all(|r| r.admissible)
    }
}

#[allow(clippy::too_many_arguments)]
fn record<T: Real>(
    n: usize,
    traj: &[State<T>],
    bg: &Background<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    distance: Option<T>,
    prev_distance: Option<T>,
) -> Result<IterateRecord<T>> {
    let mut rec = IterateRecord {
        n,
        distance,
        ratio: match (distance, prev_distance) {
            (Some(d), Some(p)) if p > T::zero() => Some(d / p),
            _ => None,
        },
        admissible: true,
        min_theta: T::infinity(),
        min_q: T::infinity(),
        min_p_minus_q: T::infinity(),
        h1_norm: T::zero(),
    };
    for (v, vbar) in traj.iter().zip(&bg.vbar) {
        let adm = validate_admissibility(v, outflow, params);
        rec.admissible &= adm.ok;
        rec.min_theta = rec.min_theta.min(adm.min_theta);
        rec.min_q = rec.min_q.min(adm.min_q);
        rec.min_p_minus_q = rec.min_p_minus_q.min(adm.min_p_minus_q);
        rec.h1_norm = rec.h1_norm.max(state_norm(&v.sub(vbar), NormSpec::h(1), grid)?);
    }
    Ok(rec)
}

/// Runs the iteration from the zeroth approximation; returns the last iterate.
///
/// `v0` must satisfy the admissibility bounds with margin `2δ`.
pub fn picard_solve<T: Real>(
    v0: &State<T>,
    outflow: &OutflowData<T>,
    params: &Params<T>,
    grid: &Grid<T>,
    config: &PicardConfig<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<(Vec<State<T>>, IterationReport<T>)> {
    let strict = Params {
        delta: params.delta * T::lit(2.0),
        ..*params
    };
    let adm = validate_admissibility(v0, outflow, &strict);
    if !adm.ok {
        return Err(Error::Precondition(format!(
            "initial data within 2δ of the admissibility bounds at node {:?} \
             (min θ = {}, min q = {}, min P − q = {})",
            adm.first_violation, adm.min_theta, adm.min_q, adm.min_p_minus_q
        )));
    }
    let bg = build_background(outflow, grid);
    let comp = compatibility_derivatives(v0, outflow, params, grid, config.compat_order, forcing)?;
    let mut prev = build_zeroth_approx(&bg, &comp, outflow, grid);
    let first = record(0, &prev, &bg, outflow, params, grid, None, None)?;
    let abort = config.on_admissibility_loss == AdmissibilityPolicy::Abort;
    let mut report = IterationReport {
        records: vec![first],
        status: PicardStatus::MaxIterations,
    };
    if !first.admissible && abort {
        report.status = PicardStatus::AdmissibilityLost;
        return Ok((prev, report));
    }
    let mut prev_distance = None;
    for n in 1..=config.max_iter {
        let next = solve_linear_problem(&prev, v0, outflow, params, grid, forcing)?;
        let d = sup_distance(&next, &prev, NormSpec::L2, grid)?;
        let rec = record(n, &next, &bg, outflow, params, grid, Some(d), prev_distance)?;
        report.records.push(rec);
        prev = next;
        prev_distance = Some(d);
        if !rec.admissible && abort {
            report.status = PicardStatus::AdmissibilityLost;
            break;
        }
        if d <= config.tol {
            report.status = PicardStatus::Converged;
            break;
        }
    }
    Ok((prev, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample_outflow, OutflowRecipe};

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoff_phi(0.5f64).unwrap(), 0.0);
        assert_eq!(cutoff_phi(3.0f64).unwrap(), 1.0);
        assert!((cutoff_phi(1.5f64).unwrap() - 0.5).abs() < 1e-15);
        assert!(cutoff_phi(-0.1f64).is_err());
    }

    #[test]
    fn background_of_constant_outflow() {
        let g: Grid<f64> = make_grid(4, 9, 4.0, 0.1, 0.2).unwrap();
        let recipe = OutflowRecipe::Constant {
            u: 0.0,
            theta: 1.0,
            h: 1.0,
            p: 2.0,
            theta_star: 1.0,
        };
        let out = sample_outflow(&recipe, &g).unwrap();
        let bg = build_background(&out, &g);
        for v in &bg.vbar {
            for k in 0..g.nodes() {
                assert_eq!(v.at_index(k), Vec3([0.0, 1.0, 0.5]));
            }
        }
        assert_eq!(bg.dvbar_dt0.q.max_abs(), 0.0);
    }
}
