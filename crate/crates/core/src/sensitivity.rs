//! Phase-space displacement sensitivity: su(1,1) generators on the truncated
//! eigenbasis, a unitary displacement oracle built on a tridiagonal
//! eigendecomposition, the printed closed-form overlap evaluator, and the
//! overlap-vs-displacement sweep with period extraction.

use ndarray::Array2;
use num_complex::Complex64;

use crate::analysis::measure_tile;
use crate::eigh::{tridiag_eigen, TridiagEigen};
use crate::error::{PtError, Result};
use crate::ptcore::{coherent_coefficients, CoefficientState, PtParams, N_MAX_CAP};
use crate::special::ln_gamma;
use crate::wigner::{wigner_fast, PhaseSpaceGrid};

/// Complex displacement parameter lambda = |lambda| e^{i theta} with the
/// disentanglement-form derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct DisplacementParam {
    magnitude: f64,
    phase: f64,
}

impl DisplacementParam {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(PtError::Validation(format!(
                "displacement magnitude must be >= 0, got {magnitude}"
            )));
        }
        Ok(Self { magnitude, phase })
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }

    /// tanh|lambda| e^{i theta}; stays inside the unit disk.
    pub fn beta_prime(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude.tanh(), self.phase)
    }

    /// -2 ln cosh|lambda| <= 0.
    pub fn eta_d(&self) -> f64 {
        -2.0 * self.magnitude.cosh().ln()
    }
}

/// Ladder element g_n = sqrt((n+1)(n+2k)) with Bargmann index k = (rho+kappa)/2.
fn ladder_element(params: PtParams, n: usize) -> f64 {
    let k = params.eta() / 2.0;
    ((n as f64 + 1.0) * (n as f64 + 2.0 * k)).sqrt()
}

/// The su(1,1) generators on the first n_max+1 levels as dense matrices:
/// K+ |n> = g_n |n+1>, K- |n> = g_{n-1} |n-1>, K0 |n> = (n+k) |n>.
pub fn su11_generators(params: PtParams, n_max: usize) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let nb = n_max + 1;
    let k = params.eta() / 2.0;
    let mut kp = Array2::zeros((nb, nb));
    let mut km = Array2::zeros((nb, nb));
    let mut k0 = Array2::zeros((nb, nb));
    for n in 0..nb {
        k0[[n, n]] = n as f64 + k;
        if n + 1 < nb {
            let g = ladder_element(params, n);
            kp[[n + 1, n]] = g;
            km[[n, n + 1]] = g;
        }
    }
    (kp, km, k0)
}

/// Reusable engine applying exp(lambda K+ - conj(lambda) K-) on a fixed-size
/// truncated basis.
///
/// A diagonal phase gauge turns the anti-Hermitian generator into a real
/// symmetric tridiagonal matrix whose eigensystem scales linearly with
/// |lambda|, so one decomposition serves every displacement magnitude.
pub struct DisplacementEngine {
    n_work: usize,
    eig: TridiagEigen,
}

impl DisplacementEngine {
    pub fn new(params: PtParams, n_work: usize) -> Result<Self> {
        let diag = vec![0.0; n_work];
        let off: Vec<f64> = (0..n_work - 1).map(|n| ladder_element(params, n)).collect();
        let eig = tridiag_eigen(&diag, &off)?;
        Ok(Self { n_work, eig })
    }

    pub fn n_work(&self) -> usize {
        self.n_work
    }

    /// Apply the displacement to a coefficient vector (zero-padded to the
    /// working size). Unitary up to roundoff.
    pub fn apply(&self, coeffs: &[Complex64], d: DisplacementParam) -> Vec<Complex64> {
        let n = self.n_work;
        let phi = d.phase() + std::f64::consts::FRAC_PI_2; // gauge angle of i*lambda
        let mut tilde = vec![Complex64::ZERO; n];
        for (i, t) in tilde.iter_mut().enumerate() {
            let c = coeffs.get(i).copied().unwrap_or(Complex64::ZERO);
            *t = c * Complex64::from_polar(1.0, -(i as f64) * phi);
        }
        // y = V^T tilde
        let mut y = vec![Complex64::ZERO; n];
        for (k, yk) in y.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for i in 0..n {
                acc += self.eig.vectors[i * n + k] * tilde[i];
            }
            *yk = acc;
        }
        // spectral phases exp(-i |lambda| w_k)
        for (k, yk) in y.iter_mut().enumerate() {
            *yk *= Complex64::from_polar(1.0, -d.magnitude() * self.eig.values[k]);
        }
        // tilde' = V y, then undo the gauge
        let mut out = vec![Complex64::ZERO; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += self.eig.vectors[i * n + k] * y[k];
            }
            *o = acc * Complex64::from_polar(1.0, i as f64 * phi);
        }
        out
    }
}

/// A displaced state together with the truncation-leakage estimate.
#[derive(Debug, Clone)]
pub struct Displaced {
    pub state: CoefficientState,
    /// Occupancy of the top two rows of the padded working basis.
    pub leakage: f64,
}

/// Leakage threshold above which the working basis is enlarged.
const LEAK_TOL: f64 = 1e-8;

/// Apply the displacement operator on an auto-enlarged truncated basis.
pub fn displace_oracle(state: &CoefficientState, d: DisplacementParam) -> Result<Displaced> {
    if d.magnitude() == 0.0 {
        return Ok(Displaced {
            state: state.clone(),
            leakage: 0.0,
        });
    }
    let mut n_work = (state.n_max() + 1 + 64).max(96);
    loop {
        if n_work > N_MAX_CAP {
            return Err(PtError::Leakage(format!(
                "displacement leakage above {LEAK_TOL} at the {N_MAX_CAP}-level cap"
            )));
        }
        let engine = DisplacementEngine::new(state.params(), n_work)?;
        let out = engine.apply(state.coeffs(), d);
        let leakage: f64 = out[n_work - 2..].iter().map(|c| c.norm_sqr()).sum();
        if leakage < LEAK_TOL {
            // trim the negligible tail before rebuilding the state
            let mut last = out.len();
            while last > 1 && out[last - 1].norm_sqr() < 1e-30 {
                last -= 1;
            }
            let state = CoefficientState::from_coeffs(state.params(), out[..last].to_vec())?;
            return Ok(Displaced { state, leakage });
        }
        n_work = n_work * 3 / 2 + 32;
    }
}

/// Closed-form overlap evaluator (symmetric well), normalized so the
/// undisplaced value is exactly 1.
///
/// Implemented exactly as the printed triple sum, with gamma ratios assembled
/// in log space and index combinations restricted to positive gamma
/// arguments and n - m + p >= 0.
pub fn overlap_analytic(
    params: PtParams,
    beta: f64,
    d: DisplacementParam,
    t: f64,
) -> Result<Complex64> {
    if !params.is_symmetric() {
        return Err(PtError::Validation(
            "printed overlap formula is for the symmetric well".into(),
        ));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(PtError::Domain(format!("beta = {beta} outside [0, 1)")));
    }
    let raw = analytic_sum(params, beta, d, t)?;
    let norm = analytic_sum(params, beta, DisplacementParam::new(0.0, d.phase())?, t)?;
    if norm.norm() == 0.0 {
        return Err(PtError::Convergence("zero normalization sum".into()));
    }
    Ok(raw / norm.norm())
}

fn analytic_sum(params: PtParams, beta: f64, d: DisplacementParam, t: f64) -> Result<Complex64> {
    let rho = params.rho();
    let bp = d.beta_prime();
    let bp_mag = bp.norm();
    let eta_d = d.eta_d();
    let ln_beta = if beta > 0.0 {
        beta.ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_bp = if bp_mag > 0.0 {
        bp_mag.ln()
    } else {
        f64::NEG_INFINITY
    };
    const N_CAP: usize = 512;
    const MP_CAP: usize = 96;
    const SHELL_TOL: f64 = 1e-14;
    let mut total = Complex64::ZERO;
    let mut n_stalled = 0usize;
    for n in 0..=N_CAP {
        let mut n_shell = Complex64::ZERO;
        for m in 0..=n.min(MP_CAP) {
            if bp_mag == 0.0 && m > 0 {
                break;
            }
            let mut m_shell = Complex64::ZERO;
            let mut ln_peak_p = f64::NEG_INFINITY;
            for p in 0..=MP_CAP {
                if bp_mag == 0.0 && p > 0 {
                    break;
                }
                let (nf, mf, pf) = (n as f64, m as f64, p as f64);
                let q = nf - mf + pf; // index of the partner energy
                if q < 0.0 {
                    continue;
                }
                // assemble the power factors avoiding 0 * (-inf)
                let beta_exp = 2.0 * nf - mf + pf;
                if beta == 0.0 && beta_exp > 0.0 {
                    continue;
                }
                let bp_exp = mf + pf;
                if bp_mag == 0.0 && bp_exp > 0.0 {
                    continue;
                }
                let power = if beta_exp > 0.0 {
                    beta_exp * ln_beta
                } else {
                    0.0
                } + if bp_exp > 0.0 { bp_exp * ln_bp } else { 0.0 }
                    - ln_gamma(mf + 1.0)
                    - ln_gamma(pf + 1.0);
                let ln_mag = power
                    + ln_gamma(2.0 * rho + 2.0 * nf - mf + pf)
                    + ln_gamma(rho + nf + 0.5)
                    + ln_gamma(2.0 * rho - mf + pf + 1.0)
                    + ln_gamma(rho + q + 0.5)
                    - ln_gamma(nf - mf + 1.0)
                    - ln_gamma(rho + nf - mf + 0.5)
                    - ln_gamma(2.0 * rho + pf + 1.0)
                    - ln_gamma(2.0 * rho + 2.0 * nf - 2.0 * mf + pf)
                    + ln_gamma(rho + q + 0.5)
                    - ln_gamma(2.0 * rho + q)
                    - (q + rho).ln()
                    + eta_d * (nf - mf + rho / 2.0 + 0.25);
                if ln_mag == f64::NEG_INFINITY {
                    continue;
                }
                if ln_mag > 700.0 {
                    return Err(PtError::NumericRange(
                        "analytic overlap term overflow".into(),
                    ));
                }
                // terms decay factorially in p; stop well past the ridge
                ln_peak_p = ln_peak_p.max(ln_mag);
                if p > 3 && ln_mag < ln_peak_p - 50.0 {
                    break;
                }
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let phase_bp = Complex64::from_polar(1.0, d.phase() * (mf + pf));
                let e_n = params.energy(n);
                let e_q = 0.5 * params.alpha() * params.alpha() * (2.0 * q + params.eta()).powi(2);
                let dyn_phase = Complex64::from_polar(1.0, -(e_n - e_q) * t);
                let term = sign * ln_mag.exp() * phase_bp * dyn_phase;
                m_shell += term;
            }
            n_shell += m_shell;
        }
        total += n_shell;
        if n_shell.norm() < SHELL_TOL * total.norm().max(1e-300) {
            n_stalled += 1;
            if n_stalled >= 3 {
                return Ok(total);
            }
        } else {
            n_stalled = 0;
        }
    }
    if n_stalled >= 1 {
        Ok(total)
    } else {
        Err(PtError::Convergence(
            "analytic overlap shells still contributing at the cap".into(),
        ))
    }
}

/// Overlap-vs-displacement curve at fixed phase angle.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OverlapCurve {
    /// Real parts of lambda at the samples.
    pub lambda_samples: Vec<f64>,
    /// Oracle |overlap| per sample.
    pub overlaps: Vec<f64>,
    /// Printed-formula |overlap| per sample (None where it failed).
    pub overlaps_analytic: Vec<Option<f64>>,
    /// Refined positions of the |overlap| minima, in Re(lambda).
    pub minima: Vec<f64>,
    /// Values of |overlap| at the local maxima, in order.
    pub envelope_maxima: Vec<f64>,
    /// Spacing between the first two minima (one visible oscillation).
    pub extracted_period: Option<f64>,
    /// Central-tile x span of the same state, for comparison.
    pub tile_dx_span: f64,
}

/// Sweep |overlap(CS(t), D CS(t))| against Re(lambda) at fixed theta, and
/// extract the first oscillation period plus the interference tile x-span.
pub fn overlap_sweep(
    params: PtParams,
    beta: f64,
    theta: f64,
    lambda_max: f64,
    n_samples: usize,
    t: f64,
) -> Result<OverlapCurve> {
    if n_samples < 50 {
        return Err(PtError::Validation(format!(
            "sweep needs at least 50 samples, got {n_samples}"
        )));
    }
    let cos_t = theta.cos();
    if cos_t.abs() < 1e-12 {
        return Err(PtError::Validation(
            "theta too close to pi/2: Re(lambda) does not parameterize the sweep".into(),
        ));
    }
    let cs = coherent_coefficients(params, Complex64::new(beta, 0.0), 1e-12)?;
    let state_t = cs.evolve(t);
    // working basis sized for the largest displacement, grown until the
    // leakage criterion holds there
    let mut n_work = (state_t.n_max() + 1 + 64).max(96);
    let engine = loop {
        if n_work > N_MAX_CAP {
            return Err(PtError::Leakage("sweep basis exceeded the hard cap".into()));
        }
        let engine = DisplacementEngine::new(params, n_work)?;
        let d_max = DisplacementParam::new(lambda_max / cos_t.abs(), theta)?;
        let out = engine.apply(state_t.coeffs(), d_max);
        let leak: f64 = out[n_work - 2..].iter().map(|c| c.norm_sqr()).sum();
        if leak < LEAK_TOL {
            break engine;
        }
        n_work = n_work * 3 / 2 + 32;
    };
    let mut lambda_samples = Vec::with_capacity(n_samples);
    let mut overlaps = Vec::with_capacity(n_samples);
    let mut overlaps_analytic = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let re_lam = lambda_max * i as f64 / (n_samples - 1) as f64;
        let d = DisplacementParam::new(re_lam / cos_t, theta)?;
        let displaced = engine.apply(state_t.coeffs(), d);
        let ov: Complex64 = state_t
            .coeffs()
            .iter()
            .zip(displaced.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        lambda_samples.push(re_lam);
        overlaps.push(ov.norm());
        overlaps_analytic.push(overlap_analytic(params, beta, d, t).ok().map(|v| v.norm()));
    }
    // minima / maxima of the sampled curve, parabolic-refined positions
    let mut minima = Vec::new();
    let mut envelope_maxima = Vec::new();
    let h = lambda_samples[1] - lambda_samples[0];
    for i in 1..n_samples - 1 {
        let (a, b, c) = (overlaps[i - 1], overlaps[i], overlaps[i + 1]);
        if b < a && b <= c {
            let denom = a - 2.0 * b + c;
            let frac = if denom != 0.0 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            minima.push(lambda_samples[i] + frac * h);
        }
        if b > a && b >= c {
            envelope_maxima.push(b);
        }
    }
    let extracted_period = if minima.len() >= 2 {
        Some(minima[1] - minima[0])
    } else {
        None
    };
    // the compass tile of the same state, for the span comparison
    let grid = PhaseSpaceGrid::default_for(&state_t, 512, 512)?;
    let field = wigner_fast(&state_t, &grid)?;
    let m = field.moments();
    let tile = measure_tile(&field, (m.mean_x, m.mean_p))?;
    Ok(OverlapCurve {
        lambda_samples,
        overlaps,
        overlaps_analytic,
        minima,
        envelope_maxima,
        extracted_period,
        tile_dx_span: tile.dx_span,
    })
}

impl OverlapCurve {
    /// Period as a hard requirement (errors when fewer than two minima).
    pub fn period(&self) -> Result<f64> {
        self.extracted_period.ok_or_else(|| {
            PtError::PeriodExtraction(format!(
                "found {} minima, need at least 2",
                self.minima.len()
            ))
        })
    }
}

/// Machine-readable record of the printed-formula vs oracle comparison.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiscrepancyReport {
    pub lambda_samples: Vec<f64>,
    pub oracle: Vec<f64>,
    pub analytic: Vec<Option<f64>>,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Compare the printed formula against the oracle over Re(lambda) in
/// [0, lambda_max] and summarize the disagreement.
pub fn analytic_discrepancy(
    params: PtParams,
    beta: f64,
    theta: f64,
    lambda_max: f64,
    n_samples: usize,
    t: f64,
    tolerance: f64,
) -> Result<DiscrepancyReport> {
    let curve = overlap_sweep(params, beta, theta, lambda_max, n_samples, t)?;
    let mut max_abs_diff: f64 = 0.0;
    for (o, a) in curve.overlaps.iter().zip(curve.overlaps_analytic.iter()) {
        match a {
            Some(v) => max_abs_diff = max_abs_diff.max((o - v).abs()),
            None => max_abs_diff = f64::INFINITY,
        }
    }
    Ok(DiscrepancyReport {
        lambda_samples: curve.lambda_samples,
        oracle: curve.overlaps,
        analytic: curve.overlaps_analytic,
        max_abs_diff,
        tolerance,
        within_tolerance: max_abs_diff <= tolerance,
    })
}
