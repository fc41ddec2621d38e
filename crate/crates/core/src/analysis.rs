//! Phase-space metrology: coefficient-basis operator moments, interference
//! tile measurement, the inverse-action scaling sweep, Wigner overlaps, and
//! the symmetric-vs-asymmetric sensitivity experiment.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{PtError, Result};
use crate::ptcore::{coherent_coefficients, CoefficientState, PtParams};
use crate::revival::FractionalTime;
use crate::special::gauss_legendre;
use crate::wigner::{wigner_fast, PhaseSpaceGrid, WignerField};

/// Position/momentum operator matrix elements over the eigenbasis, assembled
/// once per well by Gauss-Legendre quadrature and cached.
pub struct OperatorTable {
    pub n_max: usize,
    /// <m| x |n>
    pub x: Array2<f64>,
    /// <m| x^2 |n>
    pub x2: Array2<f64>,
    /// antisymmetric kernel  integral psi_m psi_n' dx  (so p = -i d/dx)
    pub d: Array2<f64>,
    /// <m| p^2 |n> = integral psi_m' psi_n' dx
    pub p2: Array2<f64>,
}

fn table_cache() -> &'static Mutex<HashMap<(u64, u64, u64, usize), Arc<OperatorTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, u64, usize), Arc<OperatorTable>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl OperatorTable {
    /// Fetch (or build) a table covering at least `n_max` levels.
    pub fn for_params(params: PtParams, n_max: usize) -> Result<Arc<OperatorTable>> {
        // bucket the size so nearby requests share one table
        let bucket = n_max.next_multiple_of(16);
        let key = (
            params.rho().to_bits(),
            params.kappa().to_bits(),
            params.alpha().to_bits(),
            bucket,
        );
        if let Some(t) = table_cache().lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::build(params, bucket)?);
        table_cache().lock().unwrap().insert(key, table.clone());
        Ok(table)
    }

    fn build(params: PtParams, n_max: usize) -> Result<OperatorTable> {
        let l = params.well_width();
        let nb = n_max + 1;
        // node count follows the largest local wavenumber of psi_m psi_n
        let q = ((1.25 * (2.0 * n_max as f64 + params.eta())) as usize + 64).max(256);
        let (nodes, weights) = gauss_legendre(q);
        // map [-1,1] -> [0, L]
        let xs: Vec<f64> = nodes.iter().map(|t| 0.5 * l * (t + 1.0)).collect();
        let ws: Vec<f64> = weights.iter().map(|w| 0.5 * l * w).collect();
        // sample psi and psi' at the nodes
        let mut psi = Array2::zeros((nb, q));
        let mut dpsi = Array2::zeros((nb, q));
        let cols: Vec<(Vec<f64>, Vec<f64>)> = (0..q)
            .into_par_iter()
            .map(|iq| {
                let x = xs[iq];
                let mut col = vec![0.0; nb];
                let mut dcol = vec![0.0; nb];
                for n in 0..nb {
                    col[n] = params.eigenfunction(n, x).unwrap_or(f64::NAN);
                    dcol[n] = params.eigenfunction_deriv(n, x).unwrap_or(f64::NAN);
                }
                (col, dcol)
            })
            .collect();
        for (iq, (col, dcol)) in cols.into_iter().enumerate() {
            for n in 0..nb {
                if !col[n].is_finite() || !dcol[n].is_finite() {
                    return Err(PtError::NumericRange(format!(
                        "eigenfunction overflow while building operator table at n = {n}"
                    )));
                }
                psi[[n, iq]] = col[n];
                dpsi[[n, iq]] = dcol[n];
            }
        }
        let mut x_mat = Array2::zeros((nb, nb));
        let mut x2_mat = Array2::zeros((nb, nb));
        let mut d_mat = Array2::zeros((nb, nb));
        let mut p2_mat = Array2::zeros((nb, nb));
        let rows: Vec<(usize, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = (0..nb)
            .into_par_iter()
            .map(|m| {
                let mut xr = vec![0.0; nb];
                let mut x2r = vec![0.0; nb];
                let mut dr = vec![0.0; nb];
                let mut p2r = vec![0.0; nb];
                for n in 0..nb {
                    let (mut sx, mut sx2, mut sd, mut sp2) = (0.0, 0.0, 0.0, 0.0);
                    for iq in 0..q {
                        let wmn = ws[iq] * psi[[m, iq]];
                        sx += wmn * xs[iq] * psi[[n, iq]];
                        sx2 += wmn * xs[iq] * xs[iq] * psi[[n, iq]];
                        sd += wmn * dpsi[[n, iq]];
                        sp2 += ws[iq] * dpsi[[m, iq]] * dpsi[[n, iq]];
                    }
                    xr[n] = sx;
                    x2r[n] = sx2;
                    dr[n] = sd;
                    p2r[n] = sp2;
                }
                (m, xr, x2r, dr, p2r)
            })
            .collect();
        for (m, xr, x2r, dr, p2r) in rows {
            for n in 0..nb {
                x_mat[[m, n]] = xr[n];
                x2_mat[[m, n]] = x2r[n];
                d_mat[[m, n]] = dr[n];
                p2_mat[[m, n]] = p2r[n];
            }
        }
        Ok(OperatorTable {
            n_max,
            x: x_mat,
            x2: x2_mat,
            d: d_mat,
            p2: p2_mat,
        })
    }

    fn quad_form(&self, mat: &Array2<f64>, c: &[Complex64]) -> f64 {
        let n = c.len();
        let mut acc = Complex64::ZERO;
        for m in 0..n {
            let cm = c[m].conj();
            for k in 0..n {
                acc += cm * mat[[m, k]] * c[k];
            }
        }
        acc.re
    }

    /// (mean_x, mean_p, var_x, var_p) of a state in the coefficient basis.
    pub fn moments(&self, state: &CoefficientState) -> CoeffMoments {
        let c = state.coeffs();
        let mx = self.quad_form(&self.x, c);
        let mx2 = self.quad_form(&self.x2, c);
        // <p> = Re c^dag (-i D) c = Im(c^dag D c)
        let n = c.len();
        let mut acc = Complex64::ZERO;
        for m in 0..n {
            let cm = c[m].conj();
            for k in 0..n {
                acc += cm * self.d[[m, k]] * c[k];
            }
        }
        let mp = acc.im;
        let mp2 = self.quad_form(&self.p2, c);
        CoeffMoments {
            mean_x: mx,
            mean_p: mp,
            var_x: (mx2 - mx * mx).max(0.0),
            var_p: (mp2 - mp * mp).max(0.0),
        }
    }
}

/// Moments computed in the coefficient basis.
#[derive(Debug, Clone, Copy)]
pub struct CoeffMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl CoeffMoments {
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x.sqrt() * self.var_p.sqrt()
    }
}

/// Delta-x times Delta-p of the state, via the cached operator table.
pub fn classical_action(state: &CoefficientState) -> Result<f64> {
    let table = OperatorTable::for_params(state.params(), state.n_max())?;
    Ok(table.moments(state).uncertainty_product())
}

/// Coefficient-basis moments of the state (route-equivalent to field moments).
pub fn coefficient_moments(state: &CoefficientState) -> Result<CoeffMoments> {
    let table = OperatorTable::for_params(state.params(), state.n_max())?;
    Ok(table.moments(state))
}

/// Zero-bounded spans and area of the central interference cell.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TileMeasurement {
    pub center: (f64, f64),
    pub dx_span: f64,
    pub dp_span: f64,
    pub area: f64,
}

/// Relative |W| floor below which a local extremum is treated as a node.
const TILE_QUALIFY: f64 = 0.25;

/// One-dimensional local extrema (index, parabolic-refined coordinate, value).
fn line_extrema(vals: &[f64], coords: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for k in 1..vals.len() - 1 {
        let dl = vals[k] - vals[k - 1];
        let dr = vals[k + 1] - vals[k];
        if dl * dr < 0.0 || (dl != 0.0 && dr == 0.0) {
            // parabolic vertex refinement
            let denom = vals[k - 1] - 2.0 * vals[k] + vals[k + 1];
            let frac = if denom != 0.0 {
                (0.5 * (vals[k - 1] - vals[k + 1]) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            let h = coords[1] - coords[0];
            out.push((k, coords[k] + frac * h, vals[k]));
        }
    }
    out
}

/// Half-pitch side length along one axis: distance from the central extremum
/// to the first qualifying flanking extremum, halved when that neighbor has
/// the same sign (one full oscillation period away) and taken directly when
/// it is opposite-signed (half a period away).
fn tile_side(vals: &[f64], coords: &[f64], i0: usize, w0: f64) -> Result<f64> {
    let ext = line_extrema(vals, coords);
    let c0 = {
        // refine the center position too
        let denom = if i0 > 0 && i0 + 1 < vals.len() {
            vals[i0 - 1] - 2.0 * vals[i0] + vals[i0 + 1]
        } else {
            0.0
        };
        let h = coords[1] - coords[0];
        if denom != 0.0 {
            coords[i0] + (0.5 * (vals[i0 - 1] - vals[i0 + 1]) / denom).clamp(-0.5, 0.5) * h
        } else {
            coords[i0]
        }
    };
    let mut sides = Vec::new();
    for dir in [-1i64, 1] {
        let candidate = ext
            .iter()
            .filter(|(k, _, v)| {
                let off = *k as i64 - i0 as i64;
                off * dir > 0 && v.abs() >= TILE_QUALIFY * w0.abs()
            })
            .min_by(|a, b| {
                (a.0 as i64 - i0 as i64)
                    .abs()
                    .cmp(&(b.0 as i64 - i0 as i64).abs())
            });
        if let Some((_, pos, v)) = candidate {
            let dist = (pos - c0).abs();
            let side = if v.signum() == w0.signum() {
                dist / 2.0
            } else {
                dist
            };
            sides.push(side);
        }
    }
    sides
        .into_iter()
        .min_by(f64::total_cmp)
        .ok_or_else(|| PtError::Boundary("no qualifying flanking extremum in window".into()))
}

/// Measure the central interference cell of a field around a seed point.
///
/// The central feature is the local extremum of |W| nearest the seed within a
/// window of 10% of each grid span; each side length is half the local
/// oscillation pitch along that axis (see `tile_side`).
pub fn measure_tile(field: &WignerField, seed: (f64, f64)) -> Result<TileMeasurement> {
    let g = &field.grid;
    let wx = 0.10 * (g.x_max - g.x_min);
    let wp = 0.10 * (g.p_max - g.p_min);
    let i_lo = ((seed.0 - wx - g.x_min) / g.dx()).ceil().max(1.0) as usize;
    let i_hi = (((seed.0 + wx - g.x_min) / g.dx()).floor() as usize).min(g.nx - 2);
    let j_lo = ((seed.1 - wp - g.p_min) / g.dp()).ceil().max(1.0) as usize;
    let j_hi = (((seed.1 + wp - g.p_min) / g.dp()).floor() as usize).min(g.np - 2);
    if i_lo >= i_hi || j_lo >= j_hi {
        return Err(PtError::NoExtremum(
            "window does not intersect the grid".into(),
        ));
    }
    // strongest |W| in the window sets the qualification floor, so weak
    // numerical ripples near the seed cannot shadow the actual feature
    let mut peak: f64 = 0.0;
    for i in i_lo..=i_hi {
        for j in j_lo..=j_hi {
            peak = peak.max(field.values[[i, j]].abs());
        }
    }
    if peak < 1e-6 {
        return Err(PtError::NoExtremum(
            "no interference extremum above 1e-6 in the window".into(),
        ));
    }
    // dominant local extremum of |W| in the window; ties broken toward the
    // seed so the measurement stays deterministic on symmetric patterns
    let mut best: Option<(usize, usize, f64, f64)> = None;
    for i in i_lo..=i_hi {
        for j in j_lo..=j_hi {
            let v = field.values[[i, j]].abs();
            if v < TILE_QUALIFY * peak {
                continue;
            }
            if v >= field.values[[i - 1, j]].abs()
                && v >= field.values[[i + 1, j]].abs()
                && v >= field.values[[i, j - 1]].abs()
                && v >= field.values[[i, j + 1]].abs()
            {
                let dn = ((g.x_at(i) - seed.0) / wx).powi(2) + ((g.p_at(j) - seed.1) / wp).powi(2);
                let better = match best {
                    None => true,
                    Some((_, _, bv, bd)) => {
                        v > bv * (1.0 + 1e-9) || (v >= bv * (1.0 - 1e-9) && dn < bd)
                    }
                };
                if better {
                    best = Some((i, j, v, dn));
                }
            }
        }
    }
    let Some((i0, j0, _, _)) = best else {
        return Err(PtError::NoExtremum(
            "no qualifying interference extremum in the window".into(),
        ));
    };
    let w0 = field.values[[i0, j0]];
    // profiles through the extremum, clipped to the window
    let row: Vec<f64> = (i_lo..=i_hi).map(|i| field.values[[i, j0]]).collect();
    let row_x: Vec<f64> = (i_lo..=i_hi).map(|i| g.x_at(i)).collect();
    let col: Vec<f64> = (j_lo..=j_hi).map(|j| field.values[[i0, j]]).collect();
    let col_p: Vec<f64> = (j_lo..=j_hi).map(|j| g.p_at(j)).collect();
    let dx_span = tile_side(&row, &row_x, i0 - i_lo, w0)?;
    let dp_span = tile_side(&col, &col_p, j0 - j_lo, w0)?;
    Ok(TileMeasurement {
        center: (g.x_at(i0), g.p_at(j0)),
        dx_span,
        dp_span,
        area: dx_span * dp_span,
    })
}

/// Log-log least-squares fit of tile area against classical action.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// One point of the scaling sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub action: f64,
    pub tile_area: f64,
    pub product: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingSweep {
    pub points: Vec<SweepPoint>,
    pub failures: Vec<(f64, String)>,
    pub fit: ScalingFit,
}

pub fn fit_log_log(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(PtError::InsufficientPoints(format!(
            "log-log fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for (a, b) in points {
        if !(*a > 0.0 && *b > 0.0) {
            return Err(PtError::Domain("log-log fit needs positive data".into()));
        }
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in points {
        let (lx, ly) = (a.ln(), b.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_tot = syy - sy * sy / n;
    let ss_res: f64 = points
        .iter()
        .map(|(a, b)| {
            let pred = intercept + slope * a.ln();
            (b.ln() - pred).powi(2)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}

/// For each beta: build the coherent state, evolve to the fractional revival,
/// compute the classical action and the central tile, then regress
/// ln(area) on ln(action).
pub fn scaling_sweep(
    params: PtParams,
    betas: &[f64],
    frac: FractionalTime,
    nx: usize,
    np: usize,
) -> Result<ScalingSweep> {
    let mut results: Vec<(f64, std::result::Result<SweepPoint, String>)> = betas
        .par_iter()
        .map(|&beta| {
            let point = (|| -> Result<SweepPoint> {
                let cs = coherent_coefficients(params, Complex64::new(beta, 0.0), 1e-12)?;
                let state = cs.evolve(frac.value() * params.t_rev());
                let action = classical_action(&state)?;
                let grid = PhaseSpaceGrid::default_for(&state, nx, np)?;
                let field = wigner_fast(&state, &grid)?;
                let m = field.moments();
                let tile = measure_tile(&field, (m.mean_x, m.mean_p))?;
                Ok(SweepPoint {
                    beta,
                    action,
                    tile_area: tile.area,
                    product: action * tile.area,
                })
            })();
            (beta, point.map_err(|e| e.to_string()))
        })
        .collect();
    results.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (beta, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((beta, e)),
        }
    }
    let fit = fit_log_log(
        &points
            .iter()
            .map(|p| (p.action, p.tile_area))
            .collect::<Vec<_>>(),
    )?;
    Ok(ScalingSweep {
        points,
        failures,
        fit,
    })
}

/// 2 pi times the phase-space inner product of two fields on identical grids;
/// equals |<a|b>|^2 for pure states.
pub fn overlap_wigner(a: &WignerField, b: &WignerField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(PtError::GridMismatch(format!(
            "{:?} vs {:?}",
            a.grid, b.grid
        )));
    }
    let g = &a.grid;
    let mut acc = 0.0;
    for i in 0..g.nx {
        let wi = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
        for j in 0..g.np {
            let wj = if j == 0 || j == g.np - 1 { 0.5 } else { 1.0 };
            acc += wi * wj * a.values[[i, j]] * b.values[[i, j]];
        }
    }
    Ok(2.0 * std::f64::consts::PI * acc * g.dx() * g.dp())
}

/// Report of the internal-perturbation experiment: overlap of the symmetric
/// and slightly-asymmetric states, their p = 0 sections, and the pattern
/// displacement between them.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AsymmetryReport {
    pub overlap: f64,
    pub shift: f64,
    pub section_x: Vec<f64>,
    pub section_sym: Vec<f64>,
    pub section_asym: Vec<f64>,
    pub sym_tile: TileMeasurement,
}

/// p = 0 section of a field by linear interpolation between the bracketing
/// momentum rows, restricted to |x - center| <= half_width.
fn p0_section(field: &WignerField, center: f64, half_width: f64) -> (Vec<f64>, Vec<f64>) {
    let g = &field.grid;
    let jf = (0.0 - g.p_min) / g.dp();
    let j0 = (jf.floor() as usize).min(g.np - 2);
    let t = (jf - j0 as f64).clamp(0.0, 1.0);
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for i in 0..g.nx {
        let x = g.x_at(i);
        if (x - center).abs() <= half_width {
            xs.push(x);
            vals.push((1.0 - t) * field.values[[i, j0]] + t * field.values[[i, j0 + 1]]);
        }
    }
    (xs, vals)
}

/// Lag (in samples, parabolic-refined) maximizing the valid-overlap dot
/// product of two equal-length series.
fn xcorr_peak_lag(a: &[f64], b: &[f64], max_lag: usize) -> f64 {
    let n = a.len();
    let corr = |lag: i64| -> f64 {
        let mut s = 0.0;
        if lag >= 0 {
            let l = lag as usize;
            for i in 0..n - l {
                s += a[i] * b[i + l];
            }
        } else {
            let l = (-lag) as usize;
            for i in 0..n - l {
                s += a[i + l] * b[i];
            }
        }
        s
    };
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let v = corr(lag);
        if v > best.1 {
            best = (lag, v);
        }
    }
    let k = best.0;
    let (y0, y1, y2) = (corr(k - 1), corr(k), corr(k + 1));
    let denom = y0 - 2.0 * y1 + y2;
    let frac = if denom != 0.0 {
        (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    k as f64 + frac
}

/// Compare the compass-like states of a symmetric and a slightly asymmetric
/// well at one-eighth of the revival time.
pub fn asymmetry_experiment(
    sym: PtParams,
    asym: PtParams,
    beta_sym: f64,
    beta_asym: f64,
    nx: usize,
    np: usize,
) -> Result<AsymmetryReport> {
    let s_sym =
        coherent_coefficients(sym, Complex64::new(beta_sym, 0.0), 1e-12)?.evolve(sym.t_rev() / 8.0);
    let s_asym = coherent_coefficients(asym, Complex64::new(beta_asym, 0.0), 1e-12)?
        .evolve(asym.t_rev() / 8.0);
    // shared grid so the overlap integral is well defined
    let g1 = PhaseSpaceGrid::default_for(&s_sym, nx, np)?;
    let g2 = PhaseSpaceGrid::default_for(&s_asym, nx, np)?;
    let p_max = g1.p_max.max(g2.p_max);
    let width = sym.well_width().max(asym.well_width());
    let grid = PhaseSpaceGrid::new(0.0, width, nx, -p_max, p_max, np)?;
    let f_sym = wigner_fast(&s_sym, &grid)?;
    let f_asym = wigner_fast(&s_asym, &grid)?;
    let overlap = overlap_wigner(&f_sym, &f_asym)?;
    let m = f_sym.moments();
    let sym_tile = measure_tile(&f_sym, (m.mean_x, m.mean_p))?;
    let half_window = 0.10 * (grid.x_max - grid.x_min);
    let (xs, sec_sym) = p0_section(&f_sym, m.mean_x, half_window);
    let (_, sec_asym) = p0_section(&f_asym, m.mean_x, half_window);
    let max_lag = (xs.len() / 4).max(2);
    let lag = xcorr_peak_lag(&sec_sym, &sec_asym, max_lag);
    let shift = (lag * grid.dx()).abs();
    Ok(AsymmetryReport {
        overlap,
        shift,
        section_x: xs,
        section_sym: sec_sym,
        section_asym: sec_asym,
        sym_tile,
    })
}

/// Beta placing the peak of |c_n|^2 at a requested level.
///
/// The |d_n| = |d_{n+1}| tie points bracket the peak; the geometric mean of
/// the two bracketing ties centers it on `nbar`.
pub fn beta_for_peak_level(params: PtParams, nbar: usize) -> f64 {
    let (rho, kappa, eta) = (params.rho(), params.kappa(), params.eta());
    let tie = |n: f64| -> f64 {
        ((eta + n) * (n + 1.0) * (2.0 * n + 2.0 + eta))
            / ((rho + n + 0.5) * (kappa + n + 0.5) * (2.0 * n + eta))
    };
    if nbar == 0 {
        return (0.5 * tie(0.0)).sqrt();
    }
    (tie(nbar as f64) * tie(nbar as f64 - 1.0)).sqrt().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptcore::overlap_coeff;
    use approx::assert_abs_diff_eq;

    fn sym() -> PtParams {
        PtParams::new(50.0, 50.0, 2.0).unwrap()
    }

    fn state(beta: f64) -> CoefficientState {
        coherent_coefficients(sym(), Complex64::new(beta, 0.0), 1e-12).unwrap()
    }

    #[test]
    fn ground_state_action_is_minimal() {
        let s = state(0.0);
        let a = classical_action(&s).unwrap();
        assert!(a >= 0.5 && a < 0.52, "ground action {a}");
    }

    #[test]
    fn action_matches_field_moments() {
        // coefficient route vs Wigner-moment route
        let s = state(0.6).evolve(sym().t_rev() / 8.0);
        let a_coeff = classical_action(&s).unwrap();
        let grid = PhaseSpaceGrid::default_for(&s, 256, 256).unwrap();
        let field = wigner_fast(&s, &grid).unwrap();
        let a_field = field.moments().uncertainty_product();
        assert_abs_diff_eq!(a_coeff, a_field, epsilon = 1e-3 * a_coeff.max(1.0));
        // also the individual moments agree
        let cm = coefficient_moments(&s).unwrap();
        let fm = field.moments();
        assert_abs_diff_eq!(cm.mean_x, fm.mean_x, epsilon = 1e-3);
        assert_abs_diff_eq!(cm.mean_p, fm.mean_p, epsilon = 1e-3);
    }

    #[test]
    fn overlap_route_equivalence() {
        // |<a|b>|^2 from coefficients equals the 2 pi W-product
        let p = sym();
        let a = state(0.6).evolve(p.t_rev() / 8.0);
        let b = state(0.6).evolve(p.t_rev() / 8.0 + 0.02 * p.t_cl());
        let grid = PhaseSpaceGrid::default_for(&a, 192, 256).unwrap();
        let fa = wigner_fast(&a, &grid).unwrap();
        let fb = wigner_fast(&b, &grid).unwrap();
        let w_route = overlap_wigner(&fa, &fb).unwrap();
        let c_route = overlap_coeff(&a, &b).unwrap().norm_sqr();
        assert_abs_diff_eq!(w_route, c_route, epsilon = 1e-3);
        // purity
        let self_ov = overlap_wigner(&fa, &fa).unwrap();
        assert_abs_diff_eq!(self_ov, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn overlap_grid_mismatch_is_error() {
        let a = state(0.3);
        let g1 = PhaseSpaceGrid::default_for(&a, 64, 64).unwrap();
        let g2 = PhaseSpaceGrid::new(0.0, g1.x_max, 64, -10.0, 10.0, 64).unwrap();
        let f1 = wigner_fast(&a, &g1).unwrap();
        let f2 = wigner_fast(&a, &g2).unwrap();
        assert!(overlap_wigner(&f1, &f2).is_err());
    }

    #[test]
    fn fit_log_log_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..10)
            .map(|k| {
                let a = k as f64;
                (a, 3.0 * a.powf(-1.02))
            })
            .collect();
        let fit = fit_log_log(&pts).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.02, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.intercept, 3.0f64.ln(), epsilon = 1e-10);
        assert!(fit.r_squared > 0.999999);
        assert!(fit_log_log(&pts[..2]).is_err());
    }

    #[test]
    fn tile_measurement_deterministic() {
        let s = state(0.6).evolve(sym().t_rev() / 8.0);
        let grid = PhaseSpaceGrid::default_for(&s, 256, 256).unwrap();
        let field = wigner_fast(&s, &grid).unwrap();
        let m = field.moments();
        let t1 = measure_tile(&field, (m.mean_x, m.mean_p)).unwrap();
        let t2 = measure_tile(&field, (m.mean_x, m.mean_p)).unwrap();
        assert_eq!(t1.dx_span.to_bits(), t2.dx_span.to_bits());
        assert_eq!(t1.dp_span.to_bits(), t2.dp_span.to_bits());
        assert!(t1.area > 0.0);
        // sanity bound: a cell cannot exceed the state support area
        let a = classical_action(&s).unwrap();
        assert!(t1.area < 2.0 * a);
    }

    #[test]
    fn tile_errors_on_flat_field() {
        let s = state(0.0);
        let grid = PhaseSpaceGrid::default_for(&s, 64, 64).unwrap();
        let mut field = wigner_fast(&s, &grid).unwrap();
        field.values.fill(0.0);
        assert!(matches!(
            measure_tile(&field, (0.3, 0.0)),
            Err(PtError::NoExtremum(_))
        ));
    }

    #[test]
    fn beta_for_peak_matches_examples() {
        let b = beta_for_peak_level(sym(), 12);
        assert_abs_diff_eq!(b, 0.6, epsilon = 0.01);
        let pa = PtParams::new(50.0, 6.0, 2.0).unwrap();
        let ba = beta_for_peak_level(pa, 12);
        assert_abs_diff_eq!(ba, 0.88, epsilon = 0.01);
    }
}
