//! Command-line front end: experiment orchestration and bit-stable emission
//! of CSV/JSON/binary artifacts.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use config::{parse_frac, parse_grid, ConfigOverlay, RunConfig};
use subplanck::analysis::{asymmetry_experiment, beta_for_peak_level, scaling_sweep, ScalingSweep};
use subplanck::revival::{
    cat_identity_residual, clone_decomposition, compass_identity_residual, even_odd_split_residual,
};
use subplanck::sensitivity::{analytic_discrepancy, overlap_sweep};
use subplanck::{
    coherent_coefficients, wigner_direct, wigner_fast, PhaseSpaceGrid, PtError, PtParams, Result,
};

#[derive(Parser)]
#[command(
    name = "subplanck",
    version,
    about = "Phase-space structure of coherent states in a trigonometric well"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Left-wall stiffness parameter (> 1)
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Right-wall stiffness parameter (> 1)
    #[arg(long, global = true)]
    kappa: Option<f64>,

    /// Inverse-length scale (> 0, a.u.)
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Coherent-state parameter in [0, 1)
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Displacement phase angle (radians)
    #[arg(long, global = true)]
    theta: Option<f64>,

    /// Fractional revival time r/s (e.g. 1/8)
    #[arg(long, global = true, value_parser = frac_parser)]
    frac: Option<(u32, u32)>,

    /// Phase-space grid NXxNP (e.g. 512x512)
    #[arg(long, global = true, value_parser = grid_parser)]
    grid: Option<(usize, usize)>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Flat key = value configuration file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn frac_parser(s: &str) -> std::result::Result<(u32, u32), String> {
    parse_frac(s).ok_or_else(|| format!("expected r/s, got `{s}`"))
}

fn grid_parser(s: &str) -> std::result::Result<(usize, usize), String> {
    parse_grid(s).ok_or_else(|| format!("expected NXxNP, got `{s}`"))
}

#[derive(Subcommand)]
enum Command {
    /// Emit the energy spectrum (and optional eigenfunction samples)
    Spectrum {
        /// Highest level to emit
        #[arg(long, default_value_t = 64)]
        nmax: usize,
        /// Also sample psi_n on a fine grid for this level
        #[arg(long)]
        eigenfunction: Option<usize>,
    },
    /// Evolve to the fractional revival and emit the Wigner field
    Wigner {
        /// Use the direct-quadrature oracle path instead of the FFT path
        #[arg(long)]
        direct: bool,
    },
    /// Sweep beta, regress tile area against classical action
    Scaling {
        /// Comma-separated beta list (default 0.30..0.80 step 0.05)
        #[arg(long)]
        betas: Option<String>,
    },
    /// Verify the fractional-revival identities and clone decomposition
    RevivalCheck,
    /// Displacement-overlap sweep and the asymmetric-well comparison
    Sensitivity {
        /// Largest Re(lambda) of the sweep
        #[arg(long, default_value_t = 0.5)]
        lambda_max: f64,
        /// Number of sweep samples
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// kappa of the slightly asymmetric comparison well
        #[arg(long, default_value_t = 46.0)]
        kappa_asym: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overlay = match build_overlay(&cli.common) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let beta_default = match cli.command {
        Command::Sensitivity { .. } => 0.4,
        _ => 0.6,
    };
    let beta_explicit = overlay.beta.is_some();
    let cfg = match overlay.resolve(beta_default) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let run = match &cli.command {
        Command::Spectrum {
            nmax,
            eigenfunction,
        } => cmd_spectrum(&cfg, *nmax, *eigenfunction),
        Command::Wigner { direct } => cmd_wigner(&cfg, *direct),
        Command::Scaling { betas } => cmd_scaling(&cfg, betas.as_deref()),
        Command::RevivalCheck => cmd_revival_check(&cfg),
        Command::Sensitivity {
            lambda_max,
            samples,
            kappa_asym,
        } => cmd_sensitivity(&cfg, *lambda_max, *samples, *kappa_asym, beta_explicit),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (PtError::Validation(_) | PtError::Domain(_) | PtError::InsufficientPoints(_))) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(1)
        }
    }
}

fn build_overlay(common: &CommonArgs) -> Result<ConfigOverlay> {
    let file = match &common.config {
        Some(path) => ConfigOverlay::from_file(path)?,
        None => ConfigOverlay::default(),
    };
    let flags = ConfigOverlay {
        rho: common.rho,
        kappa: common.kappa,
        alpha: common.alpha,
        beta: common.beta,
        theta: common.theta,
        frac: common.frac,
        grid: common.grid,
        out: common.out.clone(),
    };
    Ok(flags.over(file))
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(BufWriter::new(File::create(cfg.out.join(name))?))
}

/// Write the resolved config sidecar next to the artifacts.
fn write_sidecar<T: Serialize>(cfg: &RunConfig, name: &str, extra: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Sidecar<'a, T> {
        config: &'a RunConfig,
        #[serde(flatten)]
        extra: &'a T,
    }
    let mut w = out_file(cfg, name)?;
    let doc = Sidecar { config: cfg, extra };
    serde_json::to_writer_pretty(&mut w, &doc)
        .map_err(|e| PtError::Validation(format!("json: {e}")))?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct Empty {}

fn cmd_spectrum(cfg: &RunConfig, nmax: usize, eigenfunction: Option<usize>) -> Result<()> {
    if nmax > subplanck::ptcore::N_MAX_CAP {
        return Err(PtError::Validation(format!(
            "nmax = {nmax} above the {} cap",
            subplanck::ptcore::N_MAX_CAP
        )));
    }
    let params = cfg.params()?;
    let mut w = out_file(cfg, "spectrum.csv")?;
    writeln!(w, "n,energy")?;
    for n in 0..=nmax {
        writeln!(w, "{n},{:.16e}", params.energy(n))?;
    }
    if let Some(level) = eigenfunction {
        if level > nmax {
            return Err(PtError::Validation(format!(
                "eigenfunction level {level} above nmax {nmax}"
            )));
        }
        let mut w = out_file(cfg, &format!("eigenfunction_{level}.csv"))?;
        writeln!(w, "x,psi")?;
        let l = params.well_width();
        for i in 0..=2048usize {
            let x = l * i as f64 / 2048.0;
            writeln!(w, "{x:.16e},{:.16e}", params.eigenfunction(level, x)?)?;
        }
    }
    write_sidecar(cfg, "spectrum_config.json", &Empty {})
}

fn cmd_wigner(cfg: &RunConfig, direct: bool) -> Result<()> {
    let params = cfg.params()?;
    let frac = cfg.frac()?;
    let state = coherent_coefficients(params, Complex64::new(cfg.beta, 0.0), 1e-12)?
        .evolve(frac.value() * params.t_rev());
    let grid = PhaseSpaceGrid::default_for(&state, cfg.nx, cfg.np)?;
    let field = if direct {
        wigner_direct(&state, &grid)?
    } else {
        wigner_fast(&state, &grid)?
    };
    field.write_binary(out_file(cfg, "wigner.bin")?)?;
    field.write_csv(out_file(cfg, "wigner.csv")?)?;
    #[derive(Serialize)]
    struct WignerMeta {
        direct: bool,
        imag_residue: f64,
        total_integral: f64,
    }
    write_sidecar(
        cfg,
        "wigner_config.json",
        &WignerMeta {
            direct,
            imag_residue: field.imag_residue,
            total_integral: field.total(),
        },
    )
}

fn default_betas() -> Vec<f64> {
    (0..11).map(|i| 0.30 + 0.05 * i as f64).collect()
}

fn cmd_scaling(cfg: &RunConfig, betas: Option<&str>) -> Result<()> {
    let params = cfg.params()?;
    let frac = cfg.frac()?;
    let betas: Vec<f64> = match betas {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| PtError::Validation(format!("bad beta `{s}`")))
            })
            .collect::<Result<_>>()?,
        None => default_betas(),
    };
    if betas.len() < 3 {
        return Err(PtError::InsufficientPoints(format!(
            "scaling sweep needs at least 3 betas, got {}",
            betas.len()
        )));
    }
    let sweep: ScalingSweep = scaling_sweep(params, &betas, frac, cfg.nx, cfg.np)?;
    let mut w = out_file(cfg, "scaling.csv")?;
    writeln!(w, "beta,A,a,product")?;
    for p in &sweep.points {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            p.beta, p.action, p.tile_area, p.product
        )?;
    }
    write_sidecar(cfg, "fit.json", &sweep)
}

fn cmd_revival_check(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let frac = cfg.frac()?;
    let state = coherent_coefficients(params, Complex64::new(cfg.beta, 0.0), 1e-12)?;
    #[derive(Serialize)]
    struct RevivalReport {
        cat_residual: std::result::Result<f64, String>,
        even_odd_residual: std::result::Result<f64, String>,
        compass_residual: std::result::Result<f64, String>,
        clone_count: usize,
        clone_amplitudes_sq: Vec<f64>,
        clone_fit_residual: f64,
    }
    let clones = clone_decomposition(&state, frac)?;
    let report = RevivalReport {
        cat_residual: cat_identity_residual(&state).map_err(|e| e.to_string()),
        even_odd_residual: even_odd_split_residual(&state).map_err(|e| e.to_string()),
        compass_residual: compass_identity_residual(&state).map_err(|e| e.to_string()),
        clone_count: clones.amplitudes.len(),
        clone_amplitudes_sq: clones.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        clone_fit_residual: clones.residual,
    };
    write_sidecar(cfg, "revival.json", &report)
}

fn cmd_sensitivity(
    cfg: &RunConfig,
    lambda_max: f64,
    samples: usize,
    kappa_asym: f64,
    beta_explicit: bool,
) -> Result<()> {
    let params = cfg.params()?;
    let t = params.t_rev() / 8.0;
    let curve = overlap_sweep(params, cfg.beta, cfg.theta, lambda_max, samples, t)?;
    let mut w = out_file(cfg, "overlap.csv")?;
    writeln!(w, "lambda,overlap_oracle,overlap_analytic")?;
    for i in 0..curve.lambda_samples.len() {
        let analytic = curve.overlaps_analytic[i]
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_else(|| "nan".into());
        writeln!(
            w,
            "{:.16e},{:.16e},{analytic}",
            curve.lambda_samples[i], curve.overlaps[i]
        )?;
    }
    if curve.extracted_period.is_none() {
        eprintln!("warning: fewer than two overlap minima in range; period is null");
    }
    // asymmetric comparison: runs on the structure-default state (beta 0.6)
    // unless beta was set explicitly; the asymmetric well's beta is matched
    // so the energy peak stays at the symmetric run's peak level
    let beta_cmp = if beta_explicit { cfg.beta } else { 0.6 };
    let asym = PtParams::new(cfg.rho, kappa_asym, cfg.alpha)?;
    let sym_state = coherent_coefficients(params, Complex64::new(beta_cmp, 0.0), 1e-12)?;
    let peak = sym_state
        .coeffs()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(n, _)| n)
        .unwrap_or(0);
    let beta_asym = beta_for_peak_level(asym, peak);
    let report = asymmetry_experiment(params, asym, beta_cmp, beta_asym, cfg.nx, cfg.np)?;
    let discrepancy = analytic_discrepancy(
        params,
        cfg.beta,
        cfg.theta,
        lambda_max.min(0.3),
        51,
        t,
        5e-3,
    )?;
    #[derive(Serialize)]
    struct SensitivityReport<'a> {
        period: Option<f64>,
        minima: &'a [f64],
        envelope_maxima: &'a [f64],
        tile_dx_span: f64,
        period_tile_ratio: Option<f64>,
        asym_kappa: f64,
        asym_beta: f64,
        asym_overlap: f64,
        asym_shift: f64,
        section_x: &'a [f64],
        section_sym: &'a [f64],
        section_asym: &'a [f64],
        analytic_max_abs_diff: f64,
        analytic_within_tolerance: bool,
    }
    write_sidecar(
        cfg,
        "sensitivity.json",
        &SensitivityReport {
            period: curve.extracted_period,
            minima: &curve.minima,
            envelope_maxima: &curve.envelope_maxima,
            tile_dx_span: curve.tile_dx_span,
            period_tile_ratio: curve.extracted_period.map(|p| curve.tile_dx_span / p),
            asym_kappa: kappa_asym,
            asym_beta: beta_asym,
            asym_overlap: report.overlap,
            asym_shift: report.shift,
            section_x: &report.section_x,
            section_sym: &report.section_sym,
            section_asym: &report.section_asym,
            analytic_max_abs_diff: discrepancy.max_abs_diff,
            analytic_within_tolerance: discrepancy.within_tolerance,
        },
    )
}
