//! Run configuration: defaults, flat key-value config file, flag overrides.

use std::path::{Path, PathBuf};

use serde::Serialize;
use subplanck::revival::FractionalTime;
use subplanck::{PtError, PtParams, Result};

/// Fully resolved configuration, embedded verbatim in every output sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub rho: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub frac_r: u32,
    pub frac_s: u32,
    pub nx: usize,
    pub np: usize,
    pub out: PathBuf,
}

/// Partially specified configuration prior to resolution.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverlay {
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub frac: Option<(u32, u32)>,
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
}

impl ConfigOverlay {
    /// Parse a flat `key = value` file; later keys win.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut overlay = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PtError::Validation(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                PtError::Validation(format!(
                    "{}:{}: bad {what} `{value}`",
                    path.display(),
                    lineno + 1
                ))
            };
            match key {
                "rho" => overlay.rho = Some(value.parse().map_err(|_| bad("rho"))?),
                "kappa" => overlay.kappa = Some(value.parse().map_err(|_| bad("kappa"))?),
                "alpha" => overlay.alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
                "beta" => overlay.beta = Some(value.parse().map_err(|_| bad("beta"))?),
                "theta" => overlay.theta = Some(value.parse().map_err(|_| bad("theta"))?),
                "frac" => overlay.frac = Some(parse_frac(value).ok_or_else(|| bad("frac"))?),
                "grid" => overlay.grid = Some(parse_grid(value).ok_or_else(|| bad("grid"))?),
                "out" => overlay.out = Some(PathBuf::from(value)),
                other => {
                    return Err(PtError::Validation(format!(
                        "{}:{}: unknown key `{other}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(overlay)
    }

    /// Apply `self` on top of `base` (set fields win).
    pub fn over(self, base: ConfigOverlay) -> ConfigOverlay {
        ConfigOverlay {
            rho: self.rho.or(base.rho),
            kappa: self.kappa.or(base.kappa),
            alpha: self.alpha.or(base.alpha),
            beta: self.beta.or(base.beta),
            theta: self.theta.or(base.theta),
            frac: self.frac.or(base.frac),
            grid: self.grid.or(base.grid),
            out: self.out.or(base.out),
        }
    }

    /// Fill unset fields with defaults and validate.
    ///
    /// `beta_default` differs between structure runs (0.6) and the
    /// sensitivity experiment (0.4).
    pub fn resolve(self, beta_default: f64) -> Result<RunConfig> {
        let cfg = RunConfig {
            rho: self.rho.unwrap_or(50.0),
            kappa: self.kappa.unwrap_or(50.0),
            alpha: self.alpha.unwrap_or(2.0),
            beta: self.beta.unwrap_or(beta_default),
            theta: self.theta.unwrap_or(std::f64::consts::FRAC_PI_4),
            frac_r: self.frac.map(|f| f.0).unwrap_or(1),
            frac_s: self.frac.map(|f| f.1).unwrap_or(8),
            nx: self.grid.map(|g| g.0).unwrap_or(512),
            np: self.grid.map(|g| g.1).unwrap_or(512),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
        };
        // validation happens eagerly so a bad config is a clean exit-2
        cfg.params()?;
        cfg.frac()?;
        if !(0.0..1.0).contains(&cfg.beta) {
            return Err(PtError::Validation(format!(
                "beta = {} outside [0, 1)",
                cfg.beta
            )));
        }
        if cfg.nx < 16 || cfg.np < 16 {
            return Err(PtError::Validation(format!(
                "grid {}x{} below the 16x16 minimum",
                cfg.nx, cfg.np
            )));
        }
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<PtParams> {
        PtParams::new(self.rho, self.kappa, self.alpha)
    }

    pub fn frac(&self) -> Result<FractionalTime> {
        FractionalTime::new(self.frac_r, self.frac_s)
    }
}

pub fn parse_frac(s: &str) -> Option<(u32, u32)> {
    let (r, d) = s.split_once('/')?;
    Some((r.trim().parse().ok()?, d.trim().parse().ok()?))
}

pub fn parse_grid(s: &str) -> Option<(usize, usize)> {
    let (nx, np) = s.split_once(['x', 'X'])?;
    Some((nx.trim().parse().ok()?, np.trim().parse().ok()?))
}
