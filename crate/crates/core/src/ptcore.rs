//! Exact spectral data of the trigonometric double-singular well: potential,
//! eigenenergies, eigenfunctions, coherent-state coefficients, and time
//! evolution in the energy eigenbasis.
//!
//! Units are atomic (hbar = m = 1) throughout. The well is the single
//! impenetrable cell on [0, pi/(2 alpha)].

use num_complex::Complex64;

use crate::error::{PtError, Result};
use crate::special::{jacobi_scan, ln_gamma};

/// Largest admissible basis size for coefficient construction.
pub const N_MAX_CAP: usize = 4096;

/// Default truncation tail mass for coherent-state construction.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Guard for log-magnitudes inside eigenfunction synthesis; doubles overflow
/// near exp(709).
const LN_GUARD: f64 = 700.0;

/// Well parameters (rho, kappa, alpha) and derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtParams {
    rho: f64,
    kappa: f64,
    alpha: f64,
}

impl PtParams {
    pub fn new(rho: f64, kappa: f64, alpha: f64) -> Result<Self> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(PtError::Validation(format!("rho must be > 1, got {rho}")));
        }
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(PtError::Validation(format!(
                "kappa must be > 1, got {kappa}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(PtError::Validation(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        Ok(Self { rho, kappa, alpha })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// rho + kappa.
    pub fn eta(&self) -> f64 {
        self.rho + self.kappa
    }

    /// Right wall of the selected well, pi/(2 alpha).
    pub fn well_width(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.alpha)
    }

    /// Full revival time pi/alpha^2.
    pub fn t_rev(&self) -> f64 {
        std::f64::consts::PI / (self.alpha * self.alpha)
    }

    /// Classical period pi/((rho+kappa) alpha^2).
    pub fn t_cl(&self) -> f64 {
        std::f64::consts::PI / (self.eta() * self.alpha * self.alpha)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rho == self.kappa
    }

    /// V(x) inside the open well.
    pub fn potential_value(&self, x: f64) -> Result<f64> {
        let l = self.well_width();
        if !(x > 0.0 && x < l) {
            return Err(PtError::Domain(format!(
                "x = {x} outside the open well (0, {l})"
            )));
        }
        let (s, c) = (self.alpha * x).sin_cos();
        let v = 0.5
            * self.alpha
            * self.alpha
            * (self.rho * (self.rho - 1.0) / (c * c) + self.kappa * (self.kappa - 1.0) / (s * s));
        if !v.is_finite() {
            return Err(PtError::NumericRange(format!(
                "potential overflow at x = {x}"
            )));
        }
        Ok(v)
    }

    /// E_n = (alpha^2/2) (2n + rho + kappa)^2.
    pub fn energy(&self, n: usize) -> f64 {
        let q = 2.0 * n as f64 + self.eta();
        0.5 * self.alpha * self.alpha * q * q
    }

    /// Jacobi parameters (a, b) of the eigenfunction polynomial part.
    ///
    /// The orthonormal solution pairs a = kappa - 1/2 with the (1-u) weight
    /// factor coming from sin^(2 kappa), u = cos(2 alpha x).
    fn jacobi_ab(&self) -> (f64, f64) {
        (self.kappa - 0.5, self.rho - 0.5)
    }

    /// ln of the eigenfunction normalization constant.
    fn ln_norm(&self, n: usize) -> f64 {
        let nf = n as f64;
        0.5 * (f64::ln(2.0 * self.alpha * (2.0 * nf + self.eta()))
            + ln_gamma(nf + 1.0)
            + ln_gamma(nf + self.eta())
            - ln_gamma(nf + self.rho + 0.5)
            - ln_gamma(nf + self.kappa + 0.5))
    }

    /// psi_n(x). Zero at and outside the well walls.
    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        let l = self.well_width();
        if !(0.0..=l).contains(&x) {
            return Err(PtError::Domain(format!("x = {x} outside [0, {l}]")));
        }
        if x == 0.0 || x == l {
            return Ok(0.0);
        }
        let (a, b) = self.jacobi_ab();
        let (s, c) = (self.alpha * x).sin_cos();
        let u = c * c - s * s;
        let ln_pref = self.kappa * s.ln() + self.rho * c.ln() + self.ln_norm(n);
        let mut p_n = 0.0;
        jacobi_scan(n, a, b, u, |k, v| {
            if k == n {
                p_n = v;
            }
        });
        if p_n == 0.0 {
            return Ok(0.0);
        }
        let ln_mag = ln_pref + p_n.abs().ln();
        if !ln_mag.is_finite() || ln_mag > LN_GUARD {
            return Err(PtError::NumericRange(format!(
                "eigenfunction log-magnitude {ln_mag} at n = {n}, x = {x}"
            )));
        }
        Ok(p_n.signum() * ln_mag.exp())
    }

    /// d psi_n / dx, assembled from the Jacobi derivative identity.
    pub fn eigenfunction_deriv(&self, n: usize, x: f64) -> Result<f64> {
        let l = self.well_width();
        if !(0.0..=l).contains(&x) {
            return Err(PtError::Domain(format!("x = {x} outside [0, {l}]")));
        }
        if x == 0.0 || x == l {
            // kappa, rho > 1 make the derivative vanish at the walls too
            return Ok(0.0);
        }
        let (a, b) = self.jacobi_ab();
        let (s, c) = (self.alpha * x).sin_cos();
        let u = c * c - s * s;
        let (mut p_n, mut p_n1) = (0.0, 0.0);
        jacobi_scan(n, a, b, u, |k, v| {
            if k == n {
                p_n = v;
            }
        });
        if n >= 1 {
            jacobi_scan(n - 1, a + 1.0, b + 1.0, u, |k, v| {
                if k == n - 1 {
                    p_n1 = v;
                }
            });
        }
        let dp = if n == 0 {
            0.0
        } else {
            0.5 * (n as f64 + a + b + 1.0) * p_n1
        };
        // psi = N s^kappa c^rho P(u); u' = -4 alpha s c
        let ln_base = self.kappa * s.ln() + self.rho * c.ln() + self.ln_norm(n);
        if !ln_base.is_finite() || ln_base.abs() > LN_GUARD {
            return Err(PtError::NumericRange(format!(
                "eigenfunction derivative log-magnitude at n = {n}, x = {x}"
            )));
        }
        let base = ln_base.exp();
        let bracket = self.alpha * (self.kappa * c / s - self.rho * s / c) * p_n
            - 4.0 * self.alpha * s * c * dp;
        Ok(base * bracket)
    }
}

/// Truncated coefficient vector over the eigenbasis; the universal state
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    params: PtParams,
    coeffs: Vec<Complex64>,
}

impl CoefficientState {
    /// Wrap a raw coefficient vector, renormalizing.
    pub fn from_coeffs(params: PtParams, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PtError::Validation("empty coefficient vector".into()));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(PtError::Validation(format!("bad state norm {norm}")));
        }
        for c in &mut coeffs {
            *c /= norm;
        }
        Ok(Self { params, coeffs })
    }

    pub fn params(&self) -> PtParams {
        self.params
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// c_n -> c_n exp(-i E_n t).
    pub fn evolve(&self, t: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -self.params.energy(n) * t))
            .collect();
        Self {
            params: self.params,
            coeffs,
        }
    }

    /// Mean energy sum |c_n|^2 E_n.
    pub fn mean_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * self.params.energy(n))
            .sum()
    }

    /// Largest n with |c_n|^2 above the threshold.
    pub fn highest_occupied(&self, thresh: f64) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.norm_sqr() > thresh)
            .map(|(n, _)| n)
            .unwrap_or(0)
    }

    /// chi(x) = sum_n c_n psi_n(x) on a sample vector.
    ///
    /// Cost O(n_max * len(xs)); samples must lie inside the closed well.
    pub fn wavefunction(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let p = &self.params;
        let l = p.well_width();
        let (a, b) = p.jacobi_ab();
        // b_n = c_n * exp(ln N_n), hoisted out of the x loop
        let weights: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let ln_n = p.ln_norm(n);
                c * ln_n.exp()
            })
            .collect();
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            if !(0.0..=l).contains(&x) {
                return Err(PtError::Domain(format!("sample x = {x} outside [0, {l}]")));
            }
            if x == 0.0 || x == l {
                out.push(Complex64::ZERO);
                continue;
            }
            let (s, c) = (p.alpha * x).sin_cos();
            let u = c * c - s * s;
            let w = (p.kappa * s.ln() + p.rho * c.ln()).exp();
            let mut acc = Complex64::ZERO;
            let mut overflowed = false;
            jacobi_scan(self.n_max(), a, b, u, |k, v| {
                if !v.is_finite() {
                    overflowed = true;
                }
                acc += weights[k] * v;
            });
            if overflowed {
                return Err(PtError::NumericRange(format!(
                    "polynomial recurrence overflow at x = {x}"
                )));
            }
            out.push(acc * w);
        }
        Ok(out)
    }

    /// Position expectation by fine-grid quadrature of |chi|^2.
    pub fn mean_position(&self, ngrid: usize) -> Result<f64> {
        let l = self.params.well_width();
        let n = ngrid.max(64);
        let xs: Vec<f64> = (0..=n).map(|i| l * i as f64 / n as f64).collect();
        let chi = self.wavefunction(&xs)?;
        let h = l / n as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let d = chi[i].norm_sqr();
            num += w * xs[i] * d;
            den += w * d;
        }
        Ok(num * h / (den * h))
    }
}

/// Coherent-state amplitudes: c_n ~ (-beta)^n sqrt(Gamma ratios), truncated at
/// the requested tail mass and renormalized.
pub fn coherent_coefficients(
    params: PtParams,
    beta: Complex64,
    tail_tol: f64,
) -> Result<CoefficientState> {
    if tail_tol <= 0.0 {
        return Err(PtError::Validation(format!(
            "tail_tol must be positive, got {tail_tol}"
        )));
    }
    let bmag = beta.norm();
    if bmag >= 1.0 {
        return Err(PtError::Domain(format!(
            "|beta| = {bmag} outside the unit disk"
        )));
    }
    if bmag == 0.0 {
        let mut coeffs = vec![Complex64::ZERO; 1];
        coeffs[0] = Complex64::ONE;
        return CoefficientState::from_coeffs(params, coeffs);
    }
    let (rho, kappa, alpha, eta) = (params.rho, params.kappa, params.alpha, params.eta());
    let ln_b = bmag.ln();
    // log-magnitudes of the untruncated amplitudes
    let mut ln_mag = Vec::with_capacity(256);
    let mut peak = f64::NEG_INFINITY;
    for n in 0..N_MAX_CAP {
        let nf = n as f64;
        let v = nf * ln_b
            + 0.5
                * (ln_gamma(rho + nf + 0.5) + ln_gamma(kappa + nf + 0.5)
                    - (2.0 * alpha).ln()
                    - ln_gamma(eta + nf)
                    - ln_gamma(nf + 1.0)
                    - (2.0 * nf + eta).ln());
        peak = peak.max(v);
        ln_mag.push(v);
        // once far below the running peak the geometric tail is negligible
        if v - peak < -450.0 && n > 8 {
            break;
        }
    }
    let mag2: Vec<f64> = ln_mag.iter().map(|v| (2.0 * (v - peak)).exp()).collect();
    let total: f64 = mag2.iter().sum();
    let mut tail = 0.0;
    let mut n_max = None;
    for n in (0..mag2.len()).rev() {
        tail += mag2[n];
        if tail >= tail_tol * total {
            n_max = Some(n); // tail beyond n is just below tolerance
            break;
        }
    }
    let n_max = match n_max {
        Some(n) if n + 1 <= N_MAX_CAP => n,
        _ => {
            return Err(PtError::Convergence(format!(
                "tail mass {tail_tol} unreachable within the {N_MAX_CAP}-level cap"
            )))
        }
    };
    let neg_beta = -beta / bmag; // unit phase of (-beta)
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut phase = Complex64::ONE;
    for item in ln_mag.iter().take(n_max + 1) {
        coeffs.push(phase * (item - peak).exp());
        phase *= neg_beta;
    }
    CoefficientState::from_coeffs(params, coeffs)
}

/// Inner product sum conj(a_n) b_n; shorter vector is zero-padded.
pub fn overlap_coeff(a: &CoefficientState, b: &CoefficientState) -> Result<Complex64> {
    if a.params != b.params {
        return Err(PtError::ParamsMismatch(
            "overlap requires identical well parameters".into(),
        ));
    }
    Ok(a.coeffs
        .iter()
        .zip(b.coeffs.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sym() -> PtParams {
        PtParams::new(50.0, 50.0, 2.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(PtParams::new(1.0, 50.0, 2.0).is_err());
        assert!(PtParams::new(50.0, 0.5, 2.0).is_err());
        assert!(PtParams::new(50.0, 50.0, 0.0).is_err());
        let p = sym();
        assert!(p.is_symmetric());
        assert_abs_diff_eq!(p.t_rev(), std::f64::consts::PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.t_cl(), p.t_rev() / 100.0, epsilon = 1e-15);
    }

    #[test]
    fn potential_reflection_symmetry() {
        let p = sym();
        let l = p.well_width();
        let x = 0.1;
        let v1 = p.potential_value(x).unwrap();
        let v2 = p.potential_value(l - x).unwrap();
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-12 * v1.abs());
        assert!(p.potential_value(0.0).is_err());
        assert!(p.potential_value(l).is_err());
    }

    #[test]
    fn potential_minimum_location() {
        // symmetric: minimum at pi/(4 alpha); strongly asymmetric: left of it
        let p = sym();
        let l = p.well_width();
        let grid: Vec<f64> = (1..4000).map(|i| l * i as f64 / 4000.0).collect();
        let amin = grid
            .iter()
            .copied()
            .min_by(|a, b| {
                p.potential_value(*a)
                    .unwrap()
                    .total_cmp(&p.potential_value(*b).unwrap())
            })
            .unwrap();
        assert_abs_diff_eq!(amin, std::f64::consts::PI / 8.0, epsilon = l / 4000.0 * 1.5);

        let pa = PtParams::new(50.0, 6.0, 2.0).unwrap();
        let amin_a = grid
            .iter()
            .copied()
            .min_by(|a, b| {
                pa.potential_value(*a)
                    .unwrap()
                    .total_cmp(&pa.potential_value(*b).unwrap())
            })
            .unwrap();
        assert!(amin_a < std::f64::consts::PI / 8.0);
    }

    #[test]
    fn energy_values() {
        let p = sym();
        assert_abs_diff_eq!(p.energy(0), 20000.0, epsilon = 1e-9);
        // revival phases: (E_n - E_0) T_rev = 2 pi (n^2 + 100 n)
        let trev = p.t_rev();
        for n in 1..=50 {
            let phase = (p.energy(n) - p.energy(0)) * trev / (2.0 * std::f64::consts::PI);
            assert_abs_diff_eq!(phase, (n * n + 100 * n) as f64, epsilon = 1e-6);
        }
        let pa = PtParams::new(50.0, 6.0, 2.0).unwrap();
        assert_abs_diff_eq!(pa.energy(12), 12800.0, epsilon = 1e-9);
        // monotone spectrum
        for n in 0..100 {
            assert!(p.energy(n + 1) > p.energy(n));
        }
    }

    #[test]
    fn eigenfunction_ground_profile() {
        // n = 0: psi = N cos^rho sin^kappa exactly (P_0 = 1)
        let p = sym();
        let x = 0.31;
        let (s, c) = (p.alpha() * x).sin_cos();
        let expect = (p.ln_norm(0) + p.kappa() * s.ln() + p.rho() * c.ln()).exp();
        assert_abs_diff_eq!(p.eigenfunction(0, x).unwrap(), expect, epsilon = 1e-12);
        assert_eq!(p.eigenfunction(7, 0.0).unwrap(), 0.0);
        assert_eq!(p.eigenfunction(7, p.well_width()).unwrap(), 0.0);
    }

    #[test]
    fn eigenfunction_parity_relation() {
        // rho = kappa: psi_n(x) = (-1)^n psi_n(L - x)
        let p = sym();
        let l = p.well_width();
        for n in 0..=30 {
            for i in 1..12 {
                let x = l * i as f64 / 12.0;
                let lhs = p.eigenfunction(n, x).unwrap();
                let rhs = p.eigenfunction(n, l - x).unwrap() * if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn orthonormality_quadrature_oracle() {
        // Gram matrix of psi_0..psi_20 on a 4096-interval trapezoid oracle
        for params in [sym(), PtParams::new(50.0, 6.0, 2.0).unwrap()] {
            let l = params.well_width();
            let ng = 4096usize;
            let xs: Vec<f64> = (0..=ng).map(|i| l * i as f64 / ng as f64).collect();
            let h = l / ng as f64;
            let nb = 20usize;
            let mut psi = vec![vec![0.0; xs.len()]; nb + 1];
            for (n, row) in psi.iter_mut().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    row[i] = params.eigenfunction(n, x).unwrap();
                }
            }
            for m in 0..=nb {
                for n in m..=nb {
                    let mut s = 0.0;
                    for i in 0..=ng {
                        let w = if i == 0 || i == ng { 0.5 } else { 1.0 };
                        s += w * psi[m][i] * psi[n][i];
                    }
                    s *= h;
                    let expect = if m == n { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(s, expect, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn eigenfunction_derivative_consistency() {
        let p = PtParams::new(50.0, 6.0, 2.0).unwrap();
        let h = 1e-6;
        for n in [0usize, 1, 5, 12] {
            for &x in &[0.2, 0.39, 0.6] {
                let fd = (p.eigenfunction(n, x + h).unwrap() - p.eigenfunction(n, x - h).unwrap())
                    / (2.0 * h);
                let an = p.eigenfunction_deriv(n, x).unwrap();
                assert_abs_diff_eq!(an, fd, epsilon = 1e-4 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn coherent_coefficients_examples() {
        let p = sym();
        // beta = 0 -> pure ground state
        let s0 = coherent_coefficients(p, Complex64::ZERO, 1e-12).unwrap();
        assert_eq!(s0.n_max(), 0);
        assert_abs_diff_eq!(s0.coeffs()[0].re, 1.0, epsilon = 1e-15);
        // beta = 0.6 peaks at n = 12
        let s = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let peak = s
            .coeffs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap()
            .0;
        assert_eq!(peak, 12);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        // strongly asymmetric case peaks at 12 as well
        let pa = PtParams::new(50.0, 6.0, 2.0).unwrap();
        let sa = coherent_coefficients(pa, Complex64::new(0.88, 0.0), 1e-12).unwrap();
        let peak_a = sa
            .coeffs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap()
            .0;
        assert_eq!(peak_a, 12);
    }

    #[test]
    fn coherent_coefficients_tail_stability() {
        // tightening the tolerance does not change retained coefficients
        let p = sym();
        let s1 = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let s2 = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-16).unwrap();
        for n in 0..=s1.n_max() {
            let d = (s1.coeffs()[n] - s2.coeffs()[n]).norm();
            assert!(d < 1e-12, "coefficient {n} moved by {d}");
        }
    }

    #[test]
    fn coherent_rejects_bad_inputs() {
        let p = sym();
        assert!(coherent_coefficients(p, Complex64::new(1.0, 0.0), 1e-12).is_err());
        assert!(coherent_coefficients(p, Complex64::new(0.5, 0.0), 0.0).is_err());
    }

    #[test]
    fn evolve_identity_and_revival() {
        let p = sym();
        let s = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let s_same = s.evolve(0.0);
        assert_abs_diff_eq!(
            overlap_coeff(&s, &s_same).unwrap().norm(),
            1.0,
            epsilon = 1e-15
        );
        let s_rev = s.evolve(p.t_rev());
        assert_abs_diff_eq!(
            overlap_coeff(&s, &s_rev).unwrap().norm(),
            1.0,
            epsilon = 1e-12
        );
        // norm preserved exactly
        assert_abs_diff_eq!(s_rev.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn half_revival_reflects_position() {
        // at T_rev/2 the packet sits mirrored across the well center
        let p = sym();
        let s = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let x0 = s.mean_position(4096).unwrap();
        let x1 = s.evolve(p.t_rev() / 2.0).mean_position(4096).unwrap();
        assert_abs_diff_eq!(x1, p.well_width() - x0, epsilon = 1e-8);
    }

    #[test]
    fn wavefunction_matches_eigenfunction_and_norm() {
        let p = sym();
        // pure eigenstate n = 9
        let mut coeffs = vec![Complex64::ZERO; 10];
        coeffs[9] = Complex64::ONE;
        let s = CoefficientState::from_coeffs(p, coeffs).unwrap();
        for &x in &[0.11, 0.39, 0.70] {
            let chi = s.wavefunction(&[x]).unwrap()[0];
            assert_abs_diff_eq!(chi.re, p.eigenfunction(9, x).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(chi.im, 0.0, epsilon = 1e-15);
        }
        // trapezoid normalization of a CS wavefunction
        let cs = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let l = p.well_width();
        let ng = 2048usize;
        let xs: Vec<f64> = (0..=ng).map(|i| l * i as f64 / ng as f64).collect();
        let chi = cs.wavefunction(&xs).unwrap();
        let h = l / ng as f64;
        let mut norm = 0.0;
        for (i, v) in chi.iter().enumerate() {
            let w = if i == 0 || i == ng { 0.5 } else { 1.0 };
            norm += w * v.norm_sqr();
        }
        assert_abs_diff_eq!(norm * h, 1.0, epsilon = 1e-6);
        // out-of-well sample is a domain error
        assert!(cs.wavefunction(&[l + 0.1]).is_err());
    }

    #[test]
    fn quarter_revival_density_symmetry() {
        // |chi|^2 at T_rev/4 is symmetric under x -> L - x
        let p = sym();
        let cs = coherent_coefficients(p, Complex64::new(0.6, 0.0), 1e-12).unwrap();
        let cat = cs.evolve(p.t_rev() / 4.0);
        let l = p.well_width();
        for i in 1..24 {
            let x = l * i as f64 / 24.0;
            let d1 = cat.wavefunction(&[x]).unwrap()[0].norm_sqr();
            let d2 = cat.wavefunction(&[l - x]).unwrap()[0].norm_sqr();
            assert_abs_diff_eq!(d1, d2, epsilon = 1e-8 * (1.0 + d1));
        }
    }

    #[test]
    fn overlap_requires_matching_params() {
        let p1 = sym();
        let p2 = PtParams::new(50.0, 46.0, 2.0).unwrap();
        let a = coherent_coefficients(p1, Complex64::new(0.4, 0.0), 1e-12).unwrap();
        let b = coherent_coefficients(p2, Complex64::new(0.4, 0.0), 1e-12).unwrap();
        assert!(overlap_coeff(&a, &b).is_err());
    }
}
