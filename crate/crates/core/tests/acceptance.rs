//! Acceptance suite: one test per exit criterion, each printing one
//! PASS/FAIL line per sub-check before asserting.
//!
//! Reference values and tolerance bands are pinned here; a failing check
//! prints its measured value so the full picture survives in the log.

use num_complex::Complex64;
use std::sync::Mutex;
use std::time::Instant;

/// Criteria run one at a time: they saturate the thread pool and the timing
/// contract needs an uncontended measurement.
static TEST_LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    TEST_LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

use subplanck::analysis::{
    asymmetry_experiment, beta_for_peak_level, classical_action, measure_tile, overlap_wigner,
    scaling_sweep,
};
use subplanck::revival::{
    cat_identity_residual, clone_decomposition, compass_identity_residual, even_odd_split_residual,
    FractionalTime,
};
use subplanck::sensitivity::{
    analytic_discrepancy, displace_oracle, overlap_sweep, su11_generators, DisplacementParam,
};
use subplanck::{
    coherent_coefficients, overlap_coeff, wigner_direct, wigner_fast, PhaseSpaceGrid, PtParams,
};

struct Checks {
    criterion: &'static str,
    lines: Vec<(String, bool)>,
}

impl Checks {
    fn new(criterion: &'static str) -> Self {
        Self {
            criterion,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{}] {verdict}  {name}: {detail}", self.criterion);
        self.lines.push((format!("{name}: {detail}"), pass));
    }

    fn within(&mut self, name: &str, measured: f64, target: f64, rel_tol: f64) {
        let rel = (measured - target) / target;
        self.check(
            name,
            rel.abs() <= rel_tol,
            format!(
                "measured {measured:.6} vs {target} ({:+.1}%, band ±{:.0}%)",
                100.0 * rel,
                100.0 * rel_tol
            ),
        );
    }

    fn in_band(&mut self, name: &str, measured: f64, lo: f64, hi: f64) {
        self.check(
            name,
            (lo..=hi).contains(&measured),
            format!("measured {measured:.6} vs band [{lo}, {hi}]"),
        );
    }

    fn finish(self) {
        let failed: Vec<&str> = self
            .lines
            .iter()
            .filter(|(_, p)| !p)
            .map(|(s, _)| s.as_str())
            .collect();
        assert!(
            failed.is_empty(),
            "{} sub-checks failed:\n  {}",
            failed.len(),
            failed.join("\n  ")
        );
    }
}

fn sym() -> PtParams {
    PtParams::new(50.0, 50.0, 2.0).unwrap()
}

fn cs(params: PtParams, beta: f64) -> subplanck::CoefficientState {
    coherent_coefficients(params, Complex64::new(beta, 0.0), 1e-12).unwrap()
}

#[test]
fn criterion_1_scaling_law() {
    let _guard = serial();
    let mut c = Checks::new("criterion 1");
    let params = sym();
    let betas: Vec<f64> = (0..11).map(|i| 0.30 + 0.05 * i as f64).collect();
    let frac = FractionalTime::new(1, 8).unwrap();
    let sweep = scaling_sweep(params, &betas, frac, 512, 512).unwrap();
    c.check(
        "all 11 points computed",
        sweep.points.len() == 11 && sweep.failures.is_empty(),
        format!(
            "{} points, {} failures",
            sweep.points.len(),
            sweep.failures.len()
        ),
    );
    c.in_band("log-log slope", sweep.fit.slope, -1.10, -0.94);
    let first = &sweep.points[0];
    let last = &sweep.points[10];
    c.within("low endpoint action (beta=0.30)", first.action, 0.748, 0.15);
    c.within("low endpoint tile (beta=0.30)", first.tile_area, 1.41, 0.15);
    c.within("high endpoint action (beta=0.80)", last.action, 30.03, 0.15);
    c.within(
        "high endpoint tile (beta=0.80)",
        last.tile_area,
        0.035,
        0.15,
    );
    c.finish();
}

#[test]
fn criterion_2_tile_areas() {
    let _guard = serial();
    let mut c = Checks::new("criterion 2");
    // (rho, kappa, s of 1/s, reference area, relative band)
    let rows = [
        (50.0, 50.0, 8u32, 0.110, 0.15),
        (50.0, 50.0, 12, 0.144, 0.15),
        (50.0, 34.0, 8, 0.132, 0.20),
        (50.0, 34.0, 12, 0.250, 0.20),
        (50.0, 22.0, 8, 0.225, 0.20),
        (50.0, 22.0, 12, 0.290, 0.20),
    ];
    for (rho, kappa, s, reference, band) in rows {
        let params = PtParams::new(rho, kappa, 2.0).unwrap();
        let beta = if rho == kappa {
            0.6
        } else {
            beta_for_peak_level(params, 12)
        };
        let frac = FractionalTime::new(1, s).unwrap();
        let state = cs(params, beta).evolve(frac.value() * params.t_rev());
        let grid = PhaseSpaceGrid::default_for(&state, 512, 512).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let m = field.moments();
        let tile = measure_tile(&field, (m.mean_x, m.mean_p)).unwrap();
        let action = classical_action(&state).unwrap();
        let label = format!("({rho:.0},{kappa:.0},1/{s})");
        c.within(&format!("tile area {label}"), tile.area, reference, band);
        c.in_band(
            &format!("tile-action product {label}"),
            tile.area * action,
            0.75,
            1.25,
        );
    }
    c.finish();
}

#[test]
fn criterion_3_revival_identities() {
    let _guard = serial();
    let mut c = Checks::new("criterion 3");
    let cat = cat_identity_residual(&cs(sym(), 0.6)).unwrap();
    c.check(
        "cat identity residual",
        cat < 1e-8,
        format!("{cat:.3e} < 1e-8"),
    );
    let eo1 = even_odd_split_residual(&cs(PtParams::new(50.0, 6.0, 2.0).unwrap(), 0.88)).unwrap();
    c.check(
        "even/odd residual (eta = 56)",
        eo1 < 1e-8,
        format!("{eo1:.3e} < 1e-8"),
    );
    let eo2 = even_odd_split_residual(&cs(PtParams::new(50.0, 4.0, 2.0).unwrap(), 0.8)).unwrap();
    c.check(
        "even/odd residual (eta = 54)",
        eo2 < 1e-8,
        format!("{eo2:.3e} < 1e-8"),
    );
    for beta in [0.6, 0.4] {
        let r = compass_identity_residual(&cs(sym(), beta)).unwrap();
        c.check(
            &format!("compass residual (beta = {beta})"),
            r < 1e-8,
            format!("{r:.3e} < 1e-8"),
        );
    }
    // six-way breakup at T_rev/12: six equal-weight clones spanning the state
    let d = clone_decomposition(&cs(sym(), 0.6), FractionalTime::new(1, 12).unwrap()).unwrap();
    c.check(
        "benzene clone count",
        d.amplitudes.len() == 6,
        format!("{} clones", d.amplitudes.len()),
    );
    let worst_weight = d
        .amplitudes
        .iter()
        .map(|a| (a.norm_sqr() - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    c.check(
        "benzene equal weights",
        worst_weight < 1e-6 && d.residual < 1e-6,
        format!(
            "max weight deviation {worst_weight:.2e}, fit residual {:.2e}",
            d.residual
        ),
    );
    c.finish();
}

#[test]
fn criterion_4_asymmetry_sensitivity() {
    let _guard = serial();
    let mut c = Checks::new("criterion 4");
    let params_sym = sym();
    let params_asym = PtParams::new(50.0, 46.0, 2.0).unwrap();
    let beta_asym = beta_for_peak_level(params_asym, 12);
    let report = asymmetry_experiment(params_sym, params_asym, 0.6, beta_asym, 512, 512).unwrap();
    c.in_band("symmetric/asymmetric overlap", report.overlap, 0.05, 0.2);
    c.within("p = 0 section shift", report.shift, 0.01247, 0.20);
    c.check(
        "shift below tile x-span",
        report.shift < report.sym_tile.dx_span * 2.0,
        format!(
            "shift {:.5} vs tile dx span {:.5}",
            report.shift, report.sym_tile.dx_span
        ),
    );
    c.finish();
}

#[test]
fn criterion_5_displacement_sensitivity() {
    let _guard = serial();
    let mut c = Checks::new("criterion 5");
    let params = sym();
    let t = params.t_rev() / 8.0;
    let curve = overlap_sweep(params, 0.4, std::f64::consts::FRAC_PI_4, 0.5, 201, t).unwrap();
    c.check(
        "curve starts at 1",
        (curve.overlaps[0] - 1.0).abs() < 1e-10,
        format!("|overlap|(0) = {:.12}", curve.overlaps[0]),
    );
    match curve.extracted_period {
        Some(p) => c.within("first oscillation period", p, 0.079, 0.10),
        None => c.check(
            "first oscillation period",
            false,
            "no period extracted".into(),
        ),
    }
    c.within("compass tile x-span", curve.tile_dx_span, 0.075, 0.10);
    if let Some(p) = curve.extracted_period {
        let ratio = (p - curve.tile_dx_span).abs() / p;
        c.check(
            "period/tile-span consistency",
            ratio < 0.15,
            format!("|period - span|/period = {ratio:.3}"),
        );
    }
    let decaying = curve.envelope_maxima.windows(2).all(|w| w[1] < w[0]);
    c.check(
        "decaying envelope",
        decaying && curve.envelope_maxima.len() >= 2,
        format!("maxima {:?}", curve.envelope_maxima),
    );
    c.finish();
}

#[test]
fn criterion_6_property_suites() {
    let _guard = serial();
    let mut c = Checks::new("criterion 6");
    let params = sym();
    let state = cs(params, 0.6).evolve(params.t_rev() / 8.0);

    // Wigner normalization and marginals at 1e-4
    let grid = PhaseSpaceGrid::default_for(&state, 256, 256).unwrap();
    let field = wigner_fast(&state, &grid).unwrap();
    let total = field.total();
    c.check(
        "Wigner normalization",
        (total - 1.0).abs() < 1e-4,
        format!("integral {total:.8}"),
    );
    let (xd, _) = field.marginals();
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x_at(i)).collect();
    let chi = state.wavefunction(&xs).unwrap();
    let worst = xd
        .iter()
        .zip(chi.iter())
        .map(|(d, c)| (d - c.norm_sqr()).abs())
        .fold(0.0, f64::max);
    c.check(
        "marginal recovers |chi|^2",
        worst < 1e-4,
        format!("max pointwise error {worst:.2e}"),
    );

    // fast vs direct equivalence at 1e-6 (128x128 regression grid)
    let grid_sm = PhaseSpaceGrid::default_for(&state, 128, 128).unwrap();
    let fast = wigner_fast(&state, &grid_sm).unwrap();
    let direct = wigner_direct(&state, &grid_sm).unwrap();
    let dev = fast
        .values
        .iter()
        .zip(direct.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    c.check(
        "fast/direct equivalence",
        dev < 1e-6,
        format!("max-norm deviation {dev:.2e}"),
    );

    // orthonormality at 1e-9 on a 4096-interval trapezoid oracle
    let l = params.well_width();
    let ng = 4096usize;
    let h = l / ng as f64;
    let mut worst_gram: f64 = 0.0;
    let mut psi = vec![vec![0.0; ng + 1]; 21];
    for (n, row) in psi.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = params.eigenfunction(n, (i as f64 * h).min(l)).unwrap();
        }
    }
    for m in 0..=20usize {
        for n in m..=20 {
            let mut s = 0.0;
            for i in 0..=ng {
                let w = if i == 0 || i == ng { 0.5 } else { 1.0 };
                s += w * psi[m][i] * psi[n][i];
            }
            s *= h;
            let expect = if m == n { 1.0 } else { 0.0 };
            worst_gram = worst_gram.max((s - expect).abs());
        }
    }
    c.check(
        "eigenbasis orthonormality",
        worst_gram < 1e-9,
        format!("max Gram deviation {worst_gram:.2e}"),
    );

    // overlap route equivalence at 1e-3, on a pair with mid-range overlap
    let other = cs(params, 0.6).evolve(params.t_rev() / 8.0 + 0.02 * params.t_cl());
    let grid_ov = PhaseSpaceGrid::default_for(&state, 192, 256).unwrap();
    let fa = wigner_fast(&state, &grid_ov).unwrap();
    let fb = wigner_fast(&other, &grid_ov).unwrap();
    let w_route = overlap_wigner(&fa, &fb).unwrap();
    let c_route = overlap_coeff(&state, &other).unwrap().norm_sqr();
    c.check(
        "overlap route equivalence",
        (w_route - c_route).abs() < 1e-3 && c_route > 0.05,
        format!("Wigner {w_route:.6} vs coefficient {c_route:.6}"),
    );
    // purity through the Wigner product
    let self_ov = overlap_wigner(&fa, &fa).unwrap();
    c.check(
        "Wigner self-overlap purity",
        (self_ov - 1.0).abs() < 1e-3,
        format!("2 pi tr(W^2) = {self_ov:.6}"),
    );

    // su(1,1) commutation residuals at 1e-10 on the interior block
    let (kp, km, k0) = su11_generators(params, 60);
    let comm = kp.dot(&km) - km.dot(&kp);
    let mut worst_comm: f64 = 0.0;
    for i in 0..59 {
        for j in 0..59 {
            worst_comm = worst_comm.max((comm[[i, j]] + 2.0 * k0[[i, j]]).abs());
        }
    }
    c.check(
        "su(1,1) commutation residual",
        worst_comm < 1e-10,
        format!("max residual {worst_comm:.2e}"),
    );

    // displacement invertibility at 1e-8
    let packet = cs(params, 0.4);
    let d = DisplacementParam::new(0.2, std::f64::consts::FRAC_PI_4).unwrap();
    let back =
        DisplacementParam::new(0.2, std::f64::consts::FRAC_PI_4 + std::f64::consts::PI).unwrap();
    let fwd = displace_oracle(&packet, d).unwrap();
    let rt = displace_oracle(&fwd.state, back).unwrap();
    let ov = overlap_coeff(&packet, &rt.state).unwrap().norm();
    c.check(
        "displacement invertibility",
        (ov - 1.0).abs() < 1e-8,
        format!("round-trip overlap {ov:.12}"),
    );
    c.finish();
}

#[test]
fn criterion_7_analytic_vs_oracle() {
    let _guard = serial();
    let mut c = Checks::new("criterion 7");
    let params = sym();
    let t = params.t_rev() / 8.0;
    let report =
        analytic_discrepancy(params, 0.4, std::f64::consts::FRAC_PI_4, 0.3, 51, t, 5e-3).unwrap();
    if report.within_tolerance {
        c.check(
            "analytic/oracle agreement",
            true,
            format!("max |diff| {:.3e} within 5e-3", report.max_abs_diff),
        );
    } else {
        // alternate path: a machine-readable discrepancy report
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("analytic_discrepancy.json");
        let json = serde_json::to_string_pretty(&report).unwrap();
        std::fs::write(&path, &json).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let well_formed = parsed["max_abs_diff"].is_number()
            && parsed["within_tolerance"].is_boolean()
            && parsed["oracle"].is_array()
            && parsed["analytic"].is_array();
        c.check(
            "discrepancy report emitted",
            well_formed,
            format!(
                "printed formula deviates by {:.3e}; report at {}",
                report.max_abs_diff,
                path.display()
            ),
        );
    }
    c.finish();
}

/// Timing contract of the accelerated transform path (measured, not part of
/// criteria 1-7): the FFT path at 512x512 is at least 10x faster than the
/// direct quadrature at the same sampling settings.
#[test]
fn fast_path_timing_contract() {
    let _guard = serial();
    let params = sym();
    let state = cs(params, 0.6).evolve(params.t_rev() / 8.0);
    let grid = PhaseSpaceGrid::default_for(&state, 512, 512).unwrap();
    // warm up thread pool and caches
    let _ = wigner_fast(&state, &grid).unwrap();
    let t0 = Instant::now();
    let fast = wigner_fast(&state, &grid).unwrap();
    let dt_fast = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let direct = wigner_direct(&state, &grid).unwrap();
    let dt_direct = t1.elapsed().as_secs_f64();
    let dev = fast
        .values
        .iter()
        .zip(direct.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "[timing] fast {dt_fast:.3}s vs direct {dt_direct:.3}s (ratio {:.1}x), max dev {dev:.2e}",
        dt_direct / dt_fast
    );
    assert!(dev < 1e-6, "equal-accuracy check failed: {dev:.2e}");
    assert!(
        dt_direct >= 10.0 * dt_fast,
        "direct/fast ratio {:.1}x below the 10x contract",
        dt_direct / dt_fast
    );
}
