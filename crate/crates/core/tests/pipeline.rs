use std::path::Path;

use mhbl_core::app::{run_simulate, ExitStatus};
use mhbl_core::io::{read_snapshot, write_snapshot, RunConfig, Snapshot};
use mhbl_core::mms::{convergence_study, default_resolutions, CaseKind, ManufacturedCase, StudyMode};
use mhbl_core::Error;

fn constant_config(dir: &Path, theta0: &str) -> RunConfig {
    let text = format!(
        "[physics]\nmu = 1\nkappa = 1\nnu = 1\nR = 1\ncV = 1\ndelta = 0.05\n\
         [grid]\nnx = 8\nneta = 32\neta_max = 8\ndt = 0.01\nt_end = 0.05\n\
         [outflow]\nmode = constant\nU = 0\nTheta = 1\nH = 1\nP = 2\ntheta_star = 1\n\
         [initial]\nu10 = 0\ntheta0 = {theta0}\nh10 = 1\nny = 64\ny_max = 8\n\
         [picard]\ntol = 1e-12\nmax_iter = 5\n\
         [output]\ndir = {}\nsnapshot_every = 2\nemit_plots = true\n",
        dir.display()
    );
    RunConfig::parse(&text).unwrap()
}

#[test]
fn constant_run_is_a_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_simulate(&constant_config(dir.path(), "1")).unwrap();
    assert_eq!(s.status(), ExitStatus::Success);
    assert!(s.report.records[1].distance.unwrap() <= 1e-12);
    assert!(s.transformed_residual.max() <= 1e-12);
    for p in &s.snapshots {
        if let Snapshot::Physical(ps) = read_snapshot(p).unwrap() {
            assert!(ps.u2.max_abs() <= 1e-12);
            assert!(ps.h2.max_abs() <= 1e-12);
            assert!((ps.rho.max() - 1.5).abs() <= 1e-12 && (ps.rho.min() - 1.5).abs() <= 1e-12);
        }
    }
    for f in [
        "profile_u1.csv",
        "profile_theta.csv",
        "profile_h1.csv",
        "iterations.csv",
        "residuals.csv",
        "plots.gp",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn low_initial_temperature_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_simulate(&constant_config(dir.path(), "0.05")).unwrap_err();
    assert!(
        matches!(&err, Error::Precondition(m) if m.contains("initial temperature")),
        "{err}"
    );
    assert_eq!(ExitStatus::of_error(&err), ExitStatus::Precondition);
}

#[test]
fn snapshot_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_simulate(&constant_config(dir.path(), "1 + 0.1*y*exp(-y)")).unwrap();
    for p in &s.snapshots {
        let snap = read_snapshot(p).unwrap();
        let copy = dir.path().join("copy.bin");
        write_snapshot(&snap, &copy).unwrap();
        assert_eq!(std::fs::read(p).unwrap(), std::fs::read(&copy).unwrap());
    }
}

#[test]
fn constant_manufactured_case_is_exact() {
    let case = ManufacturedCase::new(CaseKind::Constant);
    let study = convergence_study(
        &case,
        &default_resolutions(&case, StudyMode::Temporal, 3),
        StudyMode::Temporal,
    )
    .unwrap();
    assert!(study.exact, "{:?}", study.rows);
}

#[test]
fn too_few_resolutions_rejected() {
    let case = ManufacturedCase::new(CaseKind::Advection);
    let res = default_resolutions(&case, StudyMode::Spatial, 2);
    assert!(matches!(
        convergence_study(&case, &res, StudyMode::Spatial),
        Err(Error::Empty(_))
    ));
}
