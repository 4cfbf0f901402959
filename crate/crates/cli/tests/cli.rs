use std::path::Path;
use std::process::{Command, Output};

fn mhbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhbl")).args(args).output().unwrap()
}

fn config(dir: &Path, theta0: &str, extra: &str) -> String {
    let text = format!(
        "[physics]\nmu = 1\nkappa = 1\nnu = 1\nR = 1\ncV = 1\ndelta = 0.05\n\
         [grid]\nnx = 8\nneta = 32\neta_max = 8\ndt = 0.01\nt_end = 0.03\n\
         [outflow]\nmode = constant\nU = 0\nTheta = 1\nH = 1\nP = 2\ntheta_star = 1\n\
         [initial]\nu10 = 0\ntheta0 = {theta0}\nh10 = 1\nny = 32\ny_max = 8\n{extra}\
         [output]\ndir = {}\n",
        dir.join("out").display()
    );
    let path = dir.join("run.ini");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhbl(&["simulate", &config(dir.path(), "1", "")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Converged"));
    let snap = dir.path().join("out/physical_00003.bin");
    let info = mhbl(&["info", snap.to_str().unwrap()]);
    assert_eq!(info.status.code(), Some(0));
    let text = String::from_utf8_lossy(&info.stdout);
    assert!(text.starts_with("physical snapshot, 8 x 32"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        mhbl(&["simulate", &config(dir.path(), "0.05", "")]).status.code(),
        Some(3)
    );
    assert_eq!(
        mhbl(&["simulate", &config(dir.path(), "1", "[grid2]\nx = 1\n")])
            .status
            .code(),
        Some(2)
    );
    let slow = "[picard]\ntol = 1e-30\nmax_iter = 2\n";
    let c = config(dir.path(), "1 + 0.2*y*exp(-y)", slow);
    assert_eq!(mhbl(&["simulate", &c]).status.code(), Some(5));
    assert_eq!(
        mhbl(&["info", dir.path().join("missing.bin").to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn check_commands() {
    let out = mhbl(&["check-identities", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2000 samples: pass"));
    let dir = tempfile::tempdir().unwrap();
    let out = mhbl(&["check-outflow", &config(dir.path(), "1", "")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max residual 0e0"));
}

#[test]
fn mms_constant_case_is_exact() {
    let out = mhbl(&["mms", "constant", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("exact to rounding"));
}
