use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhbl_core::app::{run_simulate, ExitStatus};
use mhbl_core::diagnostics::{identity_suite, outflow_consistency};
use mhbl_core::fields::sample_outflow;
use mhbl_core::io::{read_snapshot, RunConfig};
use mhbl_core::mms::{convergence_study, default_resolutions, CaseKind, ManufacturedCase, StudyMode};
use mhbl_core::Error;

#[derive(Parser)]
#[command(name = "mhbl", version, about = "Compressible MHD boundary-layer solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve in transformed coordinates, pull back and write snapshots and reports.
    Simulate { config: PathBuf },
    /// Convergence study of a manufactured case in both refinement modes.
    Mms {
        /// constant, advection, lower-order or diffusion
        case: String,
        /// Number of grid levels (at least 3).
        levels: usize,
        /// Directory for the study CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized check of the coefficient identities.
    CheckIdentities {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Residuals of the outer trace equations for a config's outflow data.
    CheckOutflow { config: PathBuf },
    /// Header and field ranges of a snapshot.
    Info { snapshot: PathBuf },
}

fn simulate(path: &Path) -> Result<ExitStatus, Error> {
    let config = RunConfig::load(path)?;
    let summary = run_simulate(&config)?;
    let rep = &summary.report;
    println!("status        {:?}", rep.status);
    println!("iterations    {}", rep.iterations());
    if let Some(d) = rep.last_distance() {
        println!("last distance {d:e}");
    }
    if let Some(r) = rep.worst_ratio() {
        println!("worst ratio   {r:.4}");
    }
    println!("admissible    {}", rep.all_admissible());
    println!(
        "residual      {:e} (transformed, max)",
        summary.transformed_residual.max()
    );
    println!("divergence h  {:e}", summary.divergence);
    println!("pressure      {:e}", summary.pressure_defect);
    println!(
        "wrote {} snapshots to {}",
        summary.snapshots.len(),
        config.output.dir.display()
    );
    Ok(summary.status())
}

fn mms(case: &str, levels: usize, out: Option<&PathBuf>) -> Result<ExitStatus, Error> {
    let case = ManufacturedCase::new(CaseKind::parse(case)?);
    let mut ok = true;
    for mode in [StudyMode::Spatial, StudyMode::Temporal] {
        let study = convergence_study(&case, &default_resolutions(&case, mode, levels), mode)?;
        let target = if mode == StudyMode::Spatial { 2.0 } else { 1.0 };
        println!("{} / {}:", case.name(), mode.name());
        study.write_csv(std::io::stdout())?;
        if study.exact {
            println!("  exact to rounding; order not defined");
        } else {
            println!(
                "  fitted order u1 {:.3}  theta {:.3}  q {:.3}  (expected {target})",
                study.orders[0], study.orders[1], study.orders[2]
            );
        }
        if !study.monotone {
            println!("  warning: errors are not monotone under refinement");
        }
        ok &= study.exact || (study.monotone && study.within(target, if target == 2.0 { 0.3 } else { 0.2 }));
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            let file = std::fs::File::create(dir.join(format!("mms_{}_{}.csv", case.name(), mode.name())))?;
            study.write_csv(file)?;
        }
    }
    Ok(if ok {
        ExitStatus::Success
    } else {
        ExitStatus::NonConvergence
    })
}

fn check_identities(samples: usize, seed: u64) -> Result<ExitStatus, Error> {
    let rep = identity_suite::<f64>(samples, seed)?;
    println!("{:<60} {:>12}", "identity", "max rel err");
    println!(
        "{:<60} {:>12}",
        "S positive definite (Cholesky failures)", rep.cholesky_failures
    );
    for (name, err) in rep.rows() {
        println!("{name:<60} {err:>12.3e}");
    }
    let ok = rep.passes(1e-12);
    println!("{} samples: {}", rep.samples, if ok { "pass" } else { "FAIL" });
    Ok(if ok { ExitStatus::Success } else { ExitStatus::Solver })
}

fn check_outflow(path: &Path) -> Result<ExitStatus, Error> {
    let config = RunConfig::load(path)?;
    let outflow = sample_outflow(&config.outflow_recipe()?, &config.grid()?)?;
    let res = outflow_consistency(&outflow, &config.params)?;
    for (name, m) in ["momentum", "temperature", "field"].iter().zip(res.max) {
        println!("{name:<12} max residual {m:e}");
    }
    Ok(ExitStatus::Success)
}

fn info(path: &Path) -> Result<ExitStatus, Error> {
    let snap = read_snapshot(path)?;
    let (nx, n) = snap.shape();
    let kind = if snap.tag() == 0 { "transformed" } else { "physical" };
    println!("{kind} snapshot, {nx} x {n}, t = {}", snap.time());
    for (name, f) in snap.fields() {
        println!("  {name:<6} min {:>14.6e}  max {:>14.6e}", f.min(), f.max());
    }
    Ok(ExitStatus::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MHBL_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let result = match &cli.command {
        Command::Simulate { config } => simulate(config),
        Command::Mms { case, levels, out } => mms(case, *levels, out.as_ref()),
        Command::CheckIdentities { samples, seed } => check_identities(*samples, *seed),
        Command::CheckOutflow { config } => check_outflow(config),
        Command::Info { snapshot } => info(snapshot),
    };
    let status = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitStatus::of_error(&e)
    });
    ExitCode::from(status.code() as u8)
}
