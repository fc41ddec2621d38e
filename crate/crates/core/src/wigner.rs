//! Wigner distribution of a coefficient state on a phase-space grid over the
//! single well, with a direct-quadrature oracle path and an FFT-accelerated
//! path, plus marginals and moments.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{PtError, Result};
use crate::ptcore::CoefficientState;

/// Hard cap on the internal FFT length (memory guard).
const N_FFT_CAP: usize = 1 << 22;

/// Rectangular (x, p) sampling of the single well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        nx: usize,
        p_min: f64,
        p_max: f64,
        np: usize,
    ) -> Result<Self> {
        if nx < 16 || np < 16 {
            return Err(PtError::Validation(format!(
                "grid must be at least 16x16, got {nx}x{np}"
            )));
        }
        if !(x_max > x_min) || !(p_max > p_min) {
            return Err(PtError::Validation("grid bounds must be increasing".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            p_min,
            p_max,
            np,
        })
    }

    /// Default grid for a state: x spans the well, p symmetric with
    /// p_max = 1.2 alpha (2 n_hi + rho + kappa), n_hi at the 1e-8 occupancy cut.
    pub fn default_for(state: &CoefficientState, nx: usize, np: usize) -> Result<Self> {
        let p = state.params();
        let n_hi = state.highest_occupied(1e-8);
        let p_max = 1.2 * p.alpha() * (2.0 * n_hi as f64 + p.eta());
        Self::new(0.0, p.well_width(), nx, -p_max, p_max, np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn p_at(&self, j: usize) -> f64 {
        if j == self.np - 1 {
            self.p_max
        } else {
            self.p_min + j as f64 * self.dp()
        }
    }
}

/// Real-valued W(x, p) samples, row-major with x as the outer index.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Array2<f64>,
    /// Largest |imaginary part| discarded when taking the real transform.
    pub imag_residue: f64,
}

/// Shared z-sampling plan for both transform paths.
///
/// The FFT evaluates the transform on an internally refined p grid
/// (`dp_eff = dp / stride`) so that the correlation support always fits
/// inside one FFT frame; requested momenta stay exactly on the refined grid.
struct ZPlan {
    dz: f64,
    n_fft: usize,
    /// Refinement factor: output row j lives at FFT bin j * stride.
    stride: usize,
}

fn plan_z(state: &CoefficientState, grid: &PhaseSpaceGrid) -> Result<ZPlan> {
    let params = state.params();
    let n_hi = state.highest_occupied(1e-8);
    let p_content = 1.2 * params.alpha() * (2.0 * n_hi as f64 + params.eta());
    let p_abs = grid.p_min.abs().max(grid.p_max.abs()).max(p_content);
    let dp = grid.dp();
    // widest correlation half-support over the grid
    let l_half = 0.5 * (grid.x_max - grid.x_min).min(params.well_width());
    // refine p spacing until it satisfies the frame Nyquist bound
    let dp_bound = 0.98 * std::f64::consts::PI / (2.0 * l_half);
    let mut stride = 1usize;
    while dp / stride as f64 >= dp_bound {
        stride *= 2;
    }
    let dp_eff = dp / stride as f64;
    // dz = pi/(n_fft dp_eff) must satisfy the 8-points-per-wavelength criterion
    let dz_target = std::f64::consts::PI / (8.0 * p_abs);
    let min_fft = (std::f64::consts::PI / (dp_eff * dz_target)).ceil() as usize;
    let n_fft = min_fft.max(4 * grid.np * stride).next_power_of_two();
    if n_fft > N_FFT_CAP {
        return Err(PtError::Resolution(format!(
            "sampling criterion needs an FFT of {n_fft} > cap {N_FFT_CAP}"
        )));
    }
    let dz = std::f64::consts::PI / (n_fft as f64 * dp_eff);
    debug_assert!(2 * (l_half / dz).floor() as usize + 1 <= n_fft);
    Ok(ZPlan { dz, n_fft, stride })
}

/// Correlation samples f_k = conj(chi(x - z_k)) chi(x + z_k) with composite
/// Simpson weights folded in; k = -K..=K with z_k = k dz.
fn weighted_correlation_row(
    state: &CoefficientState,
    x: f64,
    dz: f64,
) -> Result<(usize, Vec<Complex64>)> {
    let l = state.params().well_width();
    let half = x.min(l - x);
    if half <= 0.0 {
        return Ok((0, Vec::new()));
    }
    let k = (half / dz).floor() as usize;
    if k == 0 {
        return Ok((0, Vec::new()));
    }
    let pts: Vec<f64> = (-(k as isize)..=k as isize)
        .map(|i| (x + i as f64 * dz).clamp(0.0, l))
        .collect();
    let chi = state.wavefunction(&pts)?;
    let mut f = Vec::with_capacity(2 * k + 1);
    for i in 0..=2 * k {
        // i indexes k_run = i - K; chi(x + z) at index i, chi(x - z) at 2K - i
        let v = chi[2 * k - i].conj() * chi[i];
        // composite Simpson over 2K intervals
        let w = if i == 0 || i == 2 * k {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        f.push(v * (w * dz / 3.0));
    }
    Ok((k, f))
}

/// Direct-quadrature oracle: naive Fourier sum per (x, p) over the shared
/// Simpson-weighted correlation samples.
pub fn wigner_direct(state: &CoefficientState, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let zp = plan_z(state, grid)?;
    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x_at(i);
            let (k, f) = weighted_correlation_row(state, x, zp.dz)?;
            let mut row = vec![0.0; grid.np];
            let mut resid: f64 = 0.0;
            if k > 0 {
                for (j, slot) in row.iter_mut().enumerate() {
                    let p = grid.p_at(j);
                    let mut acc = Complex64::ZERO;
                    for (idx, fk) in f.iter().enumerate() {
                        let z = (idx as f64 - k as f64) * zp.dz;
                        acc += fk * Complex64::from_polar(1.0, -2.0 * p * z);
                    }
                    *slot = acc.re / std::f64::consts::PI;
                    resid = resid.max(acc.im.abs() / std::f64::consts::PI);
                }
            }
            Ok((row, resid))
        })
        .collect();
    assemble(grid, rows)
}

/// FFT path: same samples and weights, z-integral for all p at once via a
/// zero-padded transform.
pub fn wigner_fast(state: &CoefficientState, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let zp = plan_z(state, grid)?;
    let fft = FftPlanner::new().plan_fft_forward(zp.n_fft);
    let fft = Arc::new(fft);
    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x_at(i);
            let (k, f) = weighted_correlation_row(state, x, zp.dz)?;
            let mut row = vec![0.0; grid.np];
            let mut resid: f64 = 0.0;
            if k > 0 {
                let mut buf = vec![Complex64::ZERO; zp.n_fft];
                for (idx, fk) in f.iter().enumerate() {
                    let krun = idx as isize - k as isize;
                    let z = krun as f64 * zp.dz;
                    // fold the p_min offset into the sample so the FFT bins
                    // land exactly on the p grid
                    let g = fk * Complex64::from_polar(1.0, -2.0 * grid.p_min * z);
                    let slot = krun.rem_euclid(zp.n_fft as isize) as usize;
                    buf[slot] = g;
                }
                fft.process(&mut buf);
                for (j, slot) in row.iter_mut().enumerate() {
                    let bin = j * zp.stride;
                    *slot = buf[bin].re / std::f64::consts::PI;
                    resid = resid.max(buf[bin].im.abs() / std::f64::consts::PI);
                }
            }
            Ok((row, resid))
        })
        .collect();
    assemble(grid, rows)
}

fn assemble(grid: &PhaseSpaceGrid, rows: Vec<Result<(Vec<f64>, f64)>>) -> Result<WignerField> {
    let mut values = Array2::zeros((grid.nx, grid.np));
    let mut resid: f64 = 0.0;
    for (i, row) in rows.into_iter().enumerate() {
        let (row, r) = row?;
        resid = resid.max(r);
        if !row.is_empty() {
            for (j, v) in row.into_iter().enumerate() {
                values[[i, j]] = v;
            }
        }
    }
    Ok(WignerField {
        grid: *grid,
        values,
        imag_residue: resid,
    })
}

impl WignerField {
    /// Trapezoid-integrated marginals: (integral over p -> x density,
    /// integral over x -> p density).
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let (dx, dp) = (self.grid.dx(), self.grid.dp());
        let x_density: Vec<f64> = (0..self.grid.nx)
            .map(|i| {
                (0..self.grid.np)
                    .map(|j| {
                        let w = if j == 0 || j == self.grid.np - 1 {
                            0.5
                        } else {
                            1.0
                        };
                        w * self.values[[i, j]]
                    })
                    .sum::<f64>()
                    * dp
            })
            .collect();
        let p_density: Vec<f64> = (0..self.grid.np)
            .map(|j| {
                (0..self.grid.nx)
                    .map(|i| {
                        let w = if i == 0 || i == self.grid.nx - 1 {
                            0.5
                        } else {
                            1.0
                        };
                        w * self.values[[i, j]]
                    })
                    .sum::<f64>()
                    * dx
            })
            .collect();
        (x_density, p_density)
    }

    /// Total integral of the field (should be 1 for a normalized state).
    pub fn total(&self) -> f64 {
        let (xd, _) = self.marginals();
        let dx = self.grid.dx();
        xd.iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i == self.grid.nx - 1 {
                    0.5
                } else {
                    1.0
                };
                w * v
            })
            .sum::<f64>()
            * dx
    }

    /// First and second moments by 2D trapezoid integration.
    pub fn moments(&self) -> FieldMoments {
        let (xd, pd) = self.marginals();
        let (dx, dp) = (self.grid.dx(), self.grid.dp());
        let norm = self.total();
        let mut mx = 0.0;
        let mut mx2 = 0.0;
        for (i, v) in xd.iter().enumerate() {
            let w = if i == 0 || i == self.grid.nx - 1 {
                0.5
            } else {
                1.0
            };
            let x = self.grid.x_at(i);
            mx += w * x * v;
            mx2 += w * x * x * v;
        }
        mx *= dx / norm;
        mx2 *= dx / norm;
        let mut mp = 0.0;
        let mut mp2 = 0.0;
        for (j, v) in pd.iter().enumerate() {
            let w = if j == 0 || j == self.grid.np - 1 {
                0.5
            } else {
                1.0
            };
            let p = self.grid.p_at(j);
            mp += w * p * v;
            mp2 += w * p * p * v;
        }
        mp *= dp / norm;
        mp2 *= dp / norm;
        FieldMoments {
            mean_x: mx,
            mean_p: mp,
            var_x: (mx2 - mx * mx).max(0.0),
            var_p: (mp2 - mp * mp).max(0.0),
        }
    }

    /// Binary layout: six little-endian f64 header values
    /// [nx, np, x_min, x_max, p_min, p_max] followed by the row-major payload.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = [
            self.grid.nx as f64,
            self.grid.np as f64,
            self.grid.x_min,
            self.grid.x_max,
            self.grid.p_min,
            self.grid.p_max,
        ];
        for v in header {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in self.values.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut header = [0.0f64; 6];
        for v in header.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        let (nx, np) = (header[0] as usize, header[1] as usize);
        let grid = PhaseSpaceGrid::new(header[2], header[3], nx, header[4], header[5], np)?;
        let mut values = Array2::zeros((nx, np));
        for i in 0..nx {
            for j in 0..np {
                r.read_exact(&mut buf)?;
                values[[i, j]] = f64::from_le_bytes(buf);
            }
        }
        Ok(Self {
            grid,
            values,
            imag_residue: 0.0,
        })
    }

    /// CSV export `x,p,w` with full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,p,w")?;
        for i in 0..self.grid.nx {
            for j in 0..self.grid.np {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    self.grid.x_at(i),
                    self.grid.p_at(j),
                    self.values[[i, j]]
                )?;
            }
        }
        Ok(())
    }
}

/// Mean and variance summary of a field.
#[derive(Debug, Clone, Copy)]
pub struct FieldMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl FieldMoments {
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x.sqrt() * self.var_p.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptcore::{coherent_coefficients, CoefficientState, PtParams};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn sym() -> PtParams {
        PtParams::new(50.0, 50.0, 2.0).unwrap()
    }

    fn cs(beta: f64) -> CoefficientState {
        coherent_coefficients(sym(), Complex64::new(beta, 0.0), 1e-12).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseSpaceGrid::new(0.0, 1.0, 8, -1.0, 1.0, 64).is_err());
        assert!(PhaseSpaceGrid::new(0.0, 0.0, 64, -1.0, 1.0, 64).is_err());
        let g = PhaseSpaceGrid::default_for(&cs(0.6), 64, 64).unwrap();
        assert!(g.p_max > 0.0 && g.p_min == -g.p_max);
        assert!(g.dx() > 0.0 && g.dp() > 0.0);
    }

    #[test]
    fn ground_state_is_positive_blob() {
        let state = cs(0.0);
        let grid = PhaseSpaceGrid::default_for(&state, 64, 64).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let min = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-3, "ground-state Wigner dipped to {min}");
        assert_abs_diff_eq!(field.total(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn marginal_recovers_position_density() {
        let state = cs(0.6).evolve(sym().t_rev() / 8.0);
        let grid = PhaseSpaceGrid::default_for(&state, 96, 192).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let (xd, pd) = field.marginals();
        let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x_at(i)).collect();
        let chi = state.wavefunction(&xs).unwrap();
        for (i, d) in xd.iter().enumerate() {
            assert_abs_diff_eq!(*d, chi[i].norm_sqr(), epsilon = 1e-4);
        }
        // marginals are near-nonnegative and normalized
        assert!(pd.iter().all(|v| *v >= -1e-4));
        assert_abs_diff_eq!(field.total(), 1.0, epsilon = 1e-4);
        // Wigner lower bound -1/pi up to discretization slack
        let min = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1.0 / std::f64::consts::PI - 1e-3);
        assert!(field.imag_residue < 1e-10);
    }

    #[test]
    fn fast_equals_direct() {
        let state = cs(0.6).evolve(sym().t_rev() / 8.0);
        let grid = PhaseSpaceGrid::default_for(&state, 128, 128).unwrap();
        let fast = wigner_fast(&state, &grid).unwrap();
        let direct = wigner_direct(&state, &grid).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in fast.values.iter().zip(direct.values.iter()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-6, "fast/direct max deviation {worst}");
    }

    #[test]
    fn eigenstate_marginal_matches_density() {
        let p = sym();
        let mut coeffs = vec![Complex64::ZERO; 4];
        coeffs[3] = Complex64::ONE;
        let state = CoefficientState::from_coeffs(p, coeffs).unwrap();
        let grid = PhaseSpaceGrid::default_for(&state, 96, 96).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let (xd, _) = field.marginals();
        for i in 0..grid.nx {
            let x = grid.x_at(i);
            let d = p.eigenfunction(3, x).unwrap().powi(2);
            assert_abs_diff_eq!(xd[i], d, epsilon = 1e-4);
        }
    }

    #[test]
    fn cat_state_moments() {
        // reflection symmetry at T_rev/4 puts the centroid at the well center
        let p = sym();
        let state = cs(0.6).evolve(p.t_rev() / 4.0);
        let grid = PhaseSpaceGrid::default_for(&state, 128, 128).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let m = field.moments();
        assert_abs_diff_eq!(m.mean_x, p.well_width() / 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.mean_p, 0.0, epsilon = 1e-3);
        assert!(m.uncertainty_product() >= 0.5 - 1e-3);
    }

    #[test]
    fn reflection_covariance() {
        // for rho = kappa, reflecting the state maps W to W(L-x, -p)
        let p = sym();
        let state = cs(0.6).evolve(p.t_rev() / 16.0);
        let reflected = CoefficientState::from_coeffs(
            p,
            state
                .coeffs()
                .iter()
                .enumerate()
                .map(|(n, c)| if n % 2 == 0 { *c } else { -*c })
                .collect(),
        )
        .unwrap();
        let grid = PhaseSpaceGrid::default_for(&state, 64, 65).unwrap();
        let w1 = wigner_fast(&state, &grid).unwrap();
        let w2 = wigner_fast(&reflected, &grid).unwrap();
        // compare W2(x, p) with W1(L - x, -p) on the shared symmetric grid
        for i in 0..grid.nx {
            for j in 0..grid.np {
                let a = w2.values[[i, j]];
                let b = w1.values[[grid.nx - 1 - i, grid.np - 1 - j]];
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn binary_roundtrip() {
        let state = cs(0.3);
        let grid = PhaseSpaceGrid::default_for(&state, 32, 48).unwrap();
        let field = wigner_fast(&state, &grid).unwrap();
        let mut buf = Vec::new();
        field.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * (6 + 32 * 48));
        let back = WignerField::read_binary(&buf[..]).unwrap();
        assert_eq!(back.grid, field.grid);
        for (a, b) in back.values.iter().zip(field.values.iter()) {
            assert_eq!(a, b);
        }
    }
}
