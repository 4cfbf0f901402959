//! CSV plot data and a gnuplot script that reads it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::ResidualReport;
use crate::error::{Error, Result};
use crate::fields::{Grid, State};
use crate::picard::IterationReport;
use crate::scalar::Real;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(|v| format!("{:e}", v.as_f64())).unwrap_or_default()
}

/// Writes `profile_u1.csv`, `profile_theta.csv` and `profile_h1.csv`: `η` against each
/// stored level at the selected `ξ` indices.
pub fn write_profiles<T: Real>(
    traj: &[State<T>],
    grid: &Grid<T>,
    xi_indices: &[usize],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if traj.is_empty() {
        return Err(Error::Empty("trajectory has no levels".into()));
    }
    if let Some(&i) = xi_indices.iter().find(|&&i| i >= grid.nx) {
        return Err(Error::OutOfRange(format!("xi index {i} outside 0..{}", grid.nx)));
    }
    let h1: Vec<_> = traj.iter().map(State::h1).collect();
    let mut paths = Vec::new();
    for name in ["u1", "theta", "h1"] {
        let path = dir.join(format!("profile_{name}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut header = vec!["eta".to_string()];
        for v in traj {
            for &i in xi_indices {
                header.push(format!("t={:.6} xi={:.6}", v.time.as_f64(), grid.xi(i).as_f64()));
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for j in 0..grid.neta {
            let mut row = vec![format!("{:e}", grid.eta(j).as_f64())];
            for (k, v) in traj.iter().enumerate() {
                let f = match name {
                    "u1" => &v.u1,
                    "theta" => &v.theta,
                    _ => &h1[k],
                };
                row.extend(xi_indices.iter().map(|&i| format!("{:e}", f.get(i, j).as_f64())));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// One row per iterate, with the contraction ratio `dₙ/dₙ₋₁`.
pub fn write_iterations<T: Real>(report: &IterationReport<T>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "n",
        "distance",
        "ratio",
        "admissible",
        "min_theta",
        "min_q",
        "min_p_minus_q",
        "h1_norm",
    ])
    .map_err(csv_err)?;
    for r in &report.records {
        w.write_record([
            r.n.to_string(),
            opt(r.distance),
            opt(r.ratio),
            r.admissible.to_string(),
            format!("{:e}", r.min_theta.as_f64()),
            format!("{:e}", r.min_q.as_f64()),
            format!("{:e}", r.min_p_minus_q.as_f64()),
            format!("{:e}", r.h1_norm.as_f64()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `(system, report)` pairs flattened to one row per equation.
pub fn write_residuals<T: Real>(reports: &[(&str, &ResidualReport<T>)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["system", "time", "equation", "max", "l2"])
        .map_err(csv_err)?;
    for (system, rep) in reports {
        let t = format!("{:e}", rep.time.as_f64());
        for e in &rep.equations {
            w.write_record([
                system.to_string(),
                t.clone(),
                e.name.to_string(),
                format!("{:e}", e.max.as_f64()),
                format!("{:e}", e.l2.as_f64()),
            ])
            .map_err(csv_err)?;
        }
        for (name, v) in [
            ("divergence h (discrete)", rep.divergence),
            ("pressure constraint", rep.pressure),
        ] {
            if let Some(v) = v {
                w.write_record([
                    system.to_string(),
                    t.clone(),
                    name.to_string(),
                    format!("{:e}", v.as_f64()),
                    String::new(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// A gnuplot script plotting the profile and iteration files found in `dir`.
pub fn write_plot_script(dir: &Path, profiles: &[PathBuf], columns: usize) -> Result<PathBuf> {
    let mut s =
        String::from("set terminal pngcairo size 900,600\nset datafile separator ','\nset key autotitle columnhead\n");
    for p in profiles {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = name.trim_end_matches(".csv");
        let _ = writeln!(
            s,
            "\nset output '{stem}.png'\nset xlabel 'eta'\nset ylabel '{}'",
            stem.trim_start_matches("profile_")
        );
        let _ = writeln!(s, "plot for [c=2:{}] '{name}' using 1:c with lines", columns + 1);
    }
    s.push_str("\nset output 'iterations.png'\nset logscale y\nset xlabel 'n'\nset ylabel 'distance'\n");
    s.push_str("plot 'iterations.csv' using 1:2 with linespoints\n");
    let path = dir.join("plots.gp");
    std::fs::write(&path, s)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use crate::picard::{IterateRecord, PicardStatus};

    #[test]
    fn empty_trajectory_rejected() {
        let g: Grid<f64> = make_grid(4, 8, 4.0, 0.1, 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_profiles::<f64>(&[], &g, &[0], dir.path()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn one_level_gives_one_file_per_field() {
        let g: Grid<f64> = make_grid(4, 8, 4.0, 0.1, 0.1).unwrap();
        let v = State::constant(&g, crate::coeffs::Vec3([0.5, 1.0, 0.5]), 0.0);
        let dir = tempfile::tempdir().unwrap();
        let files = write_profiles(&[v], &g, &[0, 2], dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let text = std::fs::read_to_string(&files[2]).unwrap();
        assert_eq!(text.lines().count(), 1 + 8);
    }

    #[test]
    fn iteration_rows_carry_ratio() {
        let records = (0..5)
            .map(|n| IterateRecord {
                n,
                distance: (n > 0).then(|| 0.1f64.powi(n as i32)),
                ratio: (n > 1).then_some(0.1),
                admissible: true,
                min_theta: 1.0,
                min_q: 0.5,
                min_p_minus_q: 1.5,
                h1_norm: 0.0,
            })
            .collect();
        let rep = IterationReport {
            records,
            status: PicardStatus::Converged,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("it.csv");
        write_iterations(&rep, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].contains("ratio"));
        assert!(lines[3].split(',').nth(2).unwrap().starts_with("1e-1"));
    }
}
