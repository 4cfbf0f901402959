//! Run configuration in INI form.

use std::path::{Path, PathBuf};

use ini::Ini;

use crate::error::{Error, Result};
use crate::expr::FieldExpr;
use crate::fields::{make_grid, Field, Grid, OutflowRecipe, Params};
use crate::picard::{AdmissibilityPolicy, PicardConfig};
use crate::transform::PhysicalGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutflowMode {
    Constant,
    Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutflowSection {
    pub mode: OutflowMode,
    /// `U, Θ, H, P, θ*` as numbers (constant mode) or expressions in `t, x`.
    pub u: String,
    pub theta: String,
    pub h: String,
    pub p: String,
    pub theta_star: String,
}

/// Initial profiles in physical coordinates, expressions in `x, y`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialSection {
    pub u10: String,
    pub theta0: String,
    pub h10: String,
    pub ny: usize,
    pub y_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_every: usize,
    pub emit_plots: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: Params<f64>,
    pub nx: usize,
    pub neta: usize,
    pub eta_max: f64,
    pub dt: f64,
    pub t_end: f64,
    pub outflow: OutflowSection,
    pub initial: InitialSection,
    pub picard: PicardConfig<f64>,
    pub output: OutputSection,
}

const SCHEMA: [(&str, &[&str]); 6] = [
    ("physics", &["mu", "kappa", "nu", "R", "cV", "delta"]),
    ("grid", &["nx", "neta", "eta_max", "dt", "t_end"]),
    ("outflow", &["mode", "U", "Theta", "H", "P", "theta_star"]),
    ("initial", &["u10", "theta0", "h10", "ny", "y_max"]),
    ("picard", &["tol", "max_iter", "compat_order", "on_admissibility_loss"]),
    ("output", &["dir", "snapshot_every", "emit_plots"]),
];

/// Variables of the initial-profile expressions.
pub const INITIAL_VARS: [&str; 2] = ["x", "y"];

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn required(&self, section: &str, key: &str) -> Result<&str> {
        self.raw(section, key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}` in [{section}]")))
    }

    fn parse<V: std::str::FromStr>(&self, section: &str, key: &str, default: Option<V>) -> Result<V> {
        match (self.raw(section, key), default) {
            (Some(s), _) => s
                .parse()
                .map_err(|_| Error::Config(format!("[{section}] {key} = `{s}` is not a valid value"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::Config(format!("missing key `{key}` in [{section}]"))),
        }
    }
}

fn check_keys(ini: &Ini) -> Result<()> {
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(Error::Config(format!("key `{k}` outside of any section")));
            }
            continue;
        };
        let keys = SCHEMA
            .iter()
            .find(|(s, _)| *s == name)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::Config(format!("unknown section [{name}]")))?;
        for (k, _) in props.iter() {
            if !keys.contains(&k) {
                return Err(Error::Config(format!("unknown key `{k}` in [{name}]")));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        check_keys(&ini)?;
        let r = Reader { ini: &ini };

        let f = |s, k| r.parse::<f64>(s, k, None);
        let params = Params::new(
            f("physics", "mu")?,
            f("physics", "kappa")?,
            f("physics", "nu")?,
            f("physics", "R")?,
            f("physics", "cV")?,
            f("physics", "delta")?,
        )
        .map_err(|e| Error::Config(e.to_string()))?;

        let mode = match r.required("outflow", "mode")? {
            "constant" => OutflowMode::Constant,
            "expr" => OutflowMode::Expr,
            other => {
                return Err(Error::Config(format!(
                    "[outflow] mode = `{other}` (expected constant or expr)"
                )))
            }
        };
        let s = |sec, k| r.required(sec, k).map(str::to_string);
        let outflow = OutflowSection {
            mode,
            u: s("outflow", "U")?,
            theta: s("outflow", "Theta")?,
            h: s("outflow", "H")?,
            p: s("outflow", "P")?,
            theta_star: s("outflow", "theta_star")?,
        };
        let initial = InitialSection {
            u10: s("initial", "u10")?,
            theta0: s("initial", "theta0")?,
            h10: s("initial", "h10")?,
            ny: r.parse("initial", "ny", None)?,
            y_max: r.parse("initial", "y_max", None)?,
        };

        let defaults = PicardConfig::<f64>::default();
        let policy = match r.raw("picard", "on_admissibility_loss").unwrap_or("abort") {
            "abort" => AdmissibilityPolicy::Abort,
            "continue" => AdmissibilityPolicy::Continue,
            other => {
                return Err(Error::Config(format!(
                    "[picard] on_admissibility_loss = `{other}` (expected abort or continue)"
                )))
            }
        };
        let picard = PicardConfig {
            tol: r.parse("picard", "tol", Some(defaults.tol))?,
            max_iter: r.parse("picard", "max_iter", Some(defaults.max_iter))?,
            compat_order: r.parse("picard", "compat_order", Some(defaults.compat_order))?,
            on_admissibility_loss: policy,
        };
        let output = OutputSection {
            dir: PathBuf::from(r.raw("output", "dir").unwrap_or("out")),
            snapshot_every: r.parse("output", "snapshot_every", Some(1))?,
            emit_plots: r.parse("output", "emit_plots", Some(true))?,
        };
        if output.snapshot_every == 0 {
            return Err(Error::Config("[output] snapshot_every must be at least 1".into()));
        }

        let cfg = RunConfig {
            params,
            nx: r.parse("grid", "nx", None)?,
            neta: r.parse("grid", "neta", None)?,
            eta_max: f("grid", "eta_max")?,
            dt: f("grid", "dt")?,
            t_end: f("grid", "t_end")?,
            outflow,
            initial,
            picard,
            output,
        };
        // surface sizing and expression errors as config errors
        cfg.grid().map_err(|e| Error::Config(e.to_string()))?;
        cfg.physical_grid().map_err(|e| Error::Config(e.to_string()))?;
        cfg.outflow_recipe().map_err(|e| Error::Config(e.to_string()))?;
        cfg.initial_exprs().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        let p = &self.params;
        let num = |x: f64| format!("{x:?}");
        ini.with_section(Some("physics"))
            .set("mu", num(p.mu))
            .set("kappa", num(p.kappa))
            .set("nu", num(p.nu))
            .set("R", num(p.r_gas))
            .set("cV", num(p.c_v))
            .set("delta", num(p.delta));
        ini.with_section(Some("grid"))
            .set("nx", self.nx.to_string())
            .set("neta", self.neta.to_string())
            .set("eta_max", num(self.eta_max))
            .set("dt", num(self.dt))
            .set("t_end", num(self.t_end));
        let o = &self.outflow;
        let mode = match o.mode {
            OutflowMode::Constant => "constant",
            OutflowMode::Expr => "expr",
        };
        ini.with_section(Some("outflow"))
            .set("mode", mode)
            .set("U", o.u.as_str())
            .set("Theta", o.theta.as_str())
            .set("H", o.h.as_str())
            .set("P", o.p.as_str())
            .set("theta_star", o.theta_star.as_str());
        let i = &self.initial;
        ini.with_section(Some("initial"))
            .set("u10", i.u10.as_str())
            .set("theta0", i.theta0.as_str())
            .set("h10", i.h10.as_str())
            .set("ny", i.ny.to_string())
            .set("y_max", num(i.y_max));
        let policy = match self.picard.on_admissibility_loss {
            AdmissibilityPolicy::Abort => "abort",
            AdmissibilityPolicy::Continue => "continue",
        };
        ini.with_section(Some("picard"))
            .set("tol", num(self.picard.tol))
            .set("max_iter", self.picard.max_iter.to_string())
            .set("compat_order", self.picard.compat_order.to_string())
            .set("on_admissibility_loss", policy);
        ini.with_section(Some("output"))
            .set("dir", self.output.dir.display().to_string())
            .set("snapshot_every", self.output.snapshot_every.to_string())
            .set("emit_plots", self.output.emit_plots.to_string());
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is utf-8")
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        make_grid(self.nx, self.neta, self.eta_max, self.dt, self.t_end)
    }

    pub fn physical_grid(&self) -> Result<PhysicalGrid<f64>> {
        PhysicalGrid::new(self.nx, self.initial.ny, self.initial.y_max)
    }

    pub fn outflow_recipe(&self) -> Result<OutflowRecipe> {
        let o = &self.outflow;
        match o.mode {
            OutflowMode::Constant => {
                let v = |name: &str, s: &str| {
                    s.parse::<f64>().map_err(|_| {
                        Error::Config(format!("[outflow] {name} = `{s}` is not a number in constant mode"))
                    })
                };
                Ok(OutflowRecipe::Constant {
                    u: v("U", &o.u)?,
                    theta: v("Theta", &o.theta)?,
                    h: v("H", &o.h)?,
                    p: v("P", &o.p)?,
                    theta_star: v("theta_star", &o.theta_star)?,
                })
            }
            OutflowMode::Expr => OutflowRecipe::expressions(&o.u, &o.theta, &o.h, &o.p, &o.theta_star),
        }
    }

    fn initial_exprs(&self) -> Result<[FieldExpr; 3]> {
        let i = &self.initial;
        Ok([
            FieldExpr::parse("u10", &i.u10, &INITIAL_VARS)?,
            FieldExpr::parse("theta0", &i.theta0, &INITIAL_VARS)?,
            FieldExpr::parse("h10", &i.h10, &INITIAL_VARS)?,
        ])
    }

    /// `(u1₀, θ₀, h1₀)` sampled on the physical grid.
    pub fn initial_fields(&self) -> Result<[Field<f64>; 3]> {
        let pg = self.physical_grid()?;
        let exprs = self.initial_exprs()?;
        let mut out = [(); 3].map(|_| Field::zeros(pg.nx, pg.ny));
        for (e, f) in exprs.iter().zip(&mut out) {
            for i in 0..pg.nx {
                for m in 0..pg.ny {
                    f.set(i, m, e.eval(&[pg.x(i), pg.y(m)])?);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "[physics]\nmu = 1\nkappa = 1\nnu = 1\nR = 1\ncV = 1\ndelta = 0.05\n\
        [grid]\nnx = 8\nneta = 16\neta_max = 6\ndt = 0.01\nt_end = 0.02\n\
        [outflow]\nmode = constant\nU = 1\nTheta = 1\nH = 1\nP = 2\ntheta_star = 1\n\
        [initial]\nu10 = 1\ntheta0 = 1\nh10 = 1\nny = 32\ny_max = 5\n";

    #[test]
    fn defaults_fill_optional_sections() {
        let c = RunConfig::parse(TEXT).unwrap();
        assert_eq!(c.picard.max_iter, 30);
        assert_eq!(c.output.snapshot_every, 1);
        assert_eq!(c.params.a, 0.5);
    }

    #[test]
    fn unknown_key_rejected() {
        let bad = format!("{TEXT}[output]\ncolour = red\n");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config(m)) if m.contains("colour")));
    }

    #[test]
    fn serialize_round_trip() {
        let c = RunConfig::parse(TEXT).unwrap();
        let again = RunConfig::parse(&c.to_ini_string()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_ini_string(), again.to_ini_string());
    }
}
