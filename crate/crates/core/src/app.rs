//! The simulate pipeline: initial η-map, Picard solve, pullback, diagnostics, artifacts.

use std::path::PathBuf;

use crate::diagnostics::{residual_transformed, ResidualReport};
use crate::error::{Error, Result};
use crate::fields::{sample_outflow, Field, OutflowData, Params, State};
use crate::io::plots::{write_iterations, write_plot_script, write_profiles, write_residuals};
use crate::io::{write_snapshot, RunConfig, Snapshot};
use crate::picard::{picard_solve, IterationReport, PicardStatus};
use crate::stepper::apply_bcs;
use crate::transform::{initial_eta_map, pullback_physical, residual_original, y_extent, PhysicalGrid, PhysicalState};

/// Process exit status for a finished or failed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Io = 1,
    Config = 2,
    Precondition = 3,
    Solver = 4,
    NonConvergence = 5,
}

impl ExitStatus {
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Io(_) => ExitStatus::Io,
            Error::Config(_) | Error::Expression { .. } | Error::Parameter(_) | Error::Sizing(_) => ExitStatus::Config,
            Error::Precondition(_) | Error::NonPositiveTrace { .. } | Error::Nondegeneracy { .. } => {
                ExitStatus::Precondition
            }
            _ => ExitStatus::Solver,
        }
    }

    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub report: IterationReport<f64>,
    pub transformed_residual: ResidualReport<f64>,
    pub physical_residuals: Vec<ResidualReport<f64>>,
    /// Largest `|∂x h1 + ∂y h2|` over physical snapshots.
    pub divergence: f64,
    /// Largest `|Rρθ + h1²/2 − P|` over physical snapshots.
    pub pressure_defect: f64,
    pub snapshots: Vec<PathBuf>,
    /// The grid of the physical snapshots.
    pub physical_grid: PhysicalGrid<f64>,
}

impl RunSummary {
    pub fn status(&self) -> ExitStatus {
        match self.report.status {
            PicardStatus::Converged => ExitStatus::Success,
            PicardStatus::MaxIterations => ExitStatus::NonConvergence,
            PicardStatus::AdmissibilityLost => ExitStatus::Solver,
        }
    }
}

fn fail(what: &str, value: f64, bound: f64, at: String) -> Error {
    Error::Precondition(format!("{what}: {value} < {bound} at {at}"))
}

/// `θ*, θ₀, h1₀ ≥ 2δ` and `h1₀²/2 ≤ P(0, x) − 2δ`.
pub fn check_initial_bounds(init: &[Field<f64>; 3], outflow: &OutflowData<f64>, params: &Params<f64>) -> Result<()> {
    let m = 2.0 * params.delta;
    let [_, theta0, h10] = init;
    for (k, p) in outflow.points().iter().enumerate() {
        if p.theta_star < m {
            let (level, i) = (k / outflow.nx, k % outflow.nx);
            return Err(fail(
                "wall temperature bound θ* ≥ 2δ",
                p.theta_star,
                m,
                format!("level {level}, x index {i}"),
            ));
        }
    }
    for i in 0..theta0.nx {
        let p = outflow.at(0, i).p;
        for j in 0..theta0.n {
            let at = || format!("x index {i}, y index {j}");
            let (th, h) = (theta0.get(i, j), h10.get(i, j));
            if th < m {
                return Err(fail("initial temperature bound θ₀ ≥ 2δ", th, m, at()));
            }
            if h < m {
                return Err(fail("initial field bound h1₀ ≥ 2δ", h, m, at()));
            }
            if h * h / 2.0 > p - m {
                return Err(fail(
                    "magnetic pressure bound P − h1₀²/2 ≥ 2δ",
                    p - h * h / 2.0,
                    m,
                    at(),
                ));
            }
        }
    }
    Ok(())
}

/// Runs the full pipeline and writes all artifacts to `config.output.dir`.
pub fn run_simulate(config: &RunConfig) -> Result<RunSummary> {
    let params = config.params;
    let grid = config.grid()?;
    let pgrid = config.physical_grid()?;
    let outflow = sample_outflow(&config.outflow_recipe()?, &grid)?;
    let init = config.initial_fields()?;
    check_initial_bounds(&init, &outflow, &params)?;

    let (v0, _eta) = initial_eta_map(&init[0], &init[1], &init[2], &pgrid, &grid, params.delta)?;
    let v0 = apply_bcs(&v0, &outflow, &grid);
    let (traj, report) = picard_solve(&v0, &outflow, &params, &grid, &config.picard, None)?;

    let transformed_residual = residual_transformed(&traj, &outflow, &params, &grid, None)?;
    // the pullback grid must lie below y(η_max) at every stored level
    let y_top = traj
        .iter()
        .map(|v| y_extent(&v.h1(), &grid))
        .fold(f64::INFINITY, f64::min);
    let pgrid = PhysicalGrid::new(grid.nx, pgrid.ny, 0.95 * y_top)?;
    let neighbor = |k: usize| if k == 0 { 1 } else { k - 1 };
    let physical = traj
        .iter()
        .enumerate()
        .map(|(k, v)| pullback_physical(v, Some(&traj[neighbor(k)]), &outflow, &params, &grid, &pgrid))
        .collect::<Result<Vec<PhysicalState<f64>>>>()?;
    let mut physical_residuals = Vec::new();
    for w in physical.windows(3) {
        let mut r = residual_original([&w[0], &w[1], &w[2]], &outflow, &params, &pgrid)?;
        r.divergence = Some(w[1].divergence(&pgrid));
        r.pressure = Some(w[1].pressure_defect(&outflow, &params));
        physical_residuals.push(r);
    }
    let divergence = physical.iter().map(|p| p.divergence(&pgrid)).fold(0.0, f64::max);
    let pressure_defect = physical
        .iter()
        .map(|p| p.pressure_defect(&outflow, &params))
        .fold(0.0, f64::max);

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.ini"), config.to_ini_string())?;
    let last = traj.len() - 1;
    let mut snapshots = Vec::new();
    let mut stored: Vec<State<f64>> = Vec::new();
    for k in (0..=last).filter(|&k| k % config.output.snapshot_every == 0 || k == last) {
        let t = dir.join(format!("transformed_{k:05}.bin"));
        let p = dir.join(format!("physical_{k:05}.bin"));
        write_snapshot(&Snapshot::Transformed(traj[k].clone()), &t)?;
        write_snapshot(&Snapshot::Physical(physical[k].clone()), &p)?;
        snapshots.extend([t, p]);
        stored.push(traj[k].clone());
    }

    write_iterations(&report, &dir.join("iterations.csv"))?;
    let mut tagged = vec![("transformed", &transformed_residual)];
    tagged.extend(physical_residuals.iter().map(|r| ("physical", r)));
    write_residuals(&tagged, &dir.join("residuals.csv"))?;
    if config.output.emit_plots {
        let xi: Vec<usize> = [0, grid.nx / 4, grid.nx / 2].into_iter().collect();
        let profiles = write_profiles(&stored, &grid, &xi, dir)?;
        write_plot_script(dir, &profiles, stored.len() * xi.len())?;
    }

    Ok(RunSummary {
        report,
        transformed_residual,
        physical_residuals,
        divergence,
        pressure_defect,
        snapshots,
        physical_grid: pgrid,
    })
}
