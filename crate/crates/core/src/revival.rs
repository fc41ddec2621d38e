//! Fractional-revival decompositions: two-way (cat), four-way (compass), and
//! six-way splitting, the even/odd asymmetric split, and the classical
//! wave-packet expansion.

use num_complex::Complex64;

use crate::error::{PtError, Result};
use crate::ptcore::{overlap_coeff, CoefficientState};

/// A reduced fraction r/s of the revival time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FractionalTime {
    r: u32,
    s: u32,
}

impl FractionalTime {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r < 1 || s < 2 {
            return Err(PtError::Validation(format!(
                "fraction {r}/{s} outside r >= 1, s >= 2"
            )));
        }
        if r > s {
            return Err(PtError::Validation(format!("fraction {r}/{s} exceeds 1")));
        }
        if gcd(r, s) != 1 {
            return Err(PtError::Validation(format!("{r}/{s} is not reduced")));
        }
        Ok(Self { r, s })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn value(&self) -> f64 {
        self.r as f64 / self.s as f64
    }

    /// Number of clones: s/2 for even s, s for odd s.
    pub fn clone_count(&self) -> usize {
        if self.s % 2 == 0 {
            (self.s / 2) as usize
        } else {
            self.s as usize
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Amplitudes of the clone expansion at a fractional revival.
#[derive(Debug, Clone)]
pub struct CloneDecomposition {
    pub amplitudes: Vec<Complex64>,
    /// Clone p is the classical packet delayed by p/l of a classical period.
    pub phase_offsets: Vec<f64>,
    pub residual: f64,
}

fn require_integer(v: f64, what: &str) -> Result<i64> {
    let r = v.round();
    if (v - r).abs() > 1e-9 {
        return Err(PtError::Validation(format!(
            "{what} = {v} is not an integer"
        )));
    }
    Ok(r as i64)
}

/// Classical wave-packet: only the linear-in-n phase is applied,
/// c_n -> c_n exp(-2 pi i n t / T_cl).
pub fn classical_packet(state0: &CoefficientState, t: f64) -> CoefficientState {
    let t_cl = state0.params().t_cl();
    let coeffs: Vec<Complex64> = state0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            c * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * n as f64 * t / t_cl)
        })
        .collect();
    // phases preserve the norm; construct directly
    CoefficientState::from_coeffs(state0.params(), coeffs).expect("norm preserved")
}

fn l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Residual of the two-way split identity at T_rev/4 for the symmetric well:
/// evolve(T/4) vs (e^{-i pi/4} chi + e^{+i pi/4} chi_reflected)/sqrt(2), the
/// reflection acting as c_n -> (-1)^n c_n.
pub fn cat_identity_residual(state0: &CoefficientState) -> Result<f64> {
    let p = state0.params();
    if !p.is_symmetric() {
        return Err(PtError::Validation(
            "cat identity requires a symmetric well".into(),
        ));
    }
    let rho_i = require_integer(p.rho(), "rho")?;
    if rho_i % 2 != 0 {
        return Err(PtError::Validation(format!(
            "cat identity requires even integer rho = kappa, got {rho_i}"
        )));
    }
    let lhs = state0.evolve(p.t_rev() / 4.0);
    let quarter = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let quarter_c = quarter.conj();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let rhs: Vec<Complex64> = state0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let refl = if n % 2 == 0 { *c } else { -*c };
            (quarter * c + quarter_c * refl) * inv_sqrt2
        })
        .collect();
    Ok(l2_diff(lhs.coeffs(), &rhs))
}

/// Residual of the even/odd split at T_rev/4 for integer even eta = rho+kappa:
/// chi_e - i chi_o when eta = 0 mod 4, -i chi_e + chi_o when eta = 2 mod 4.
pub fn even_odd_split_residual(state0: &CoefficientState) -> Result<f64> {
    let p = state0.params();
    let eta = require_integer(p.eta(), "rho+kappa")?;
    if eta % 2 != 0 {
        return Err(PtError::Validation(format!(
            "even/odd split requires even eta, got {eta}"
        )));
    }
    let lhs = state0.evolve(p.t_rev() / 4.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs: Vec<Complex64> = state0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let (we, wo) = if eta % 4 == 0 {
                (Complex64::ONE, minus_i)
            } else {
                (minus_i, Complex64::ONE)
            };
            if n % 2 == 0 {
                we * c
            } else {
                wo * c
            }
        })
        .collect();
    Ok(l2_diff(lhs.coeffs(), &rhs))
}

/// Residual (modulo an unobservable global phase) of the four-way identity at
/// T_rev/8 built from classical packets offset by quarters of T_cl.
pub fn compass_identity_residual(state0: &CoefficientState) -> Result<f64> {
    let p = state0.params();
    require_integer(p.eta(), "rho+kappa")?;
    let t = p.t_rev() / 8.0;
    let t_cl = p.t_cl();
    let lhs = state0.evolve(t);
    let quarter = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let parts = [
        (quarter * 0.5, 0.0),
        (Complex64::new(0.5, 0.0), t_cl / 4.0),
        (-quarter * 0.5, t_cl / 2.0),
        (Complex64::new(0.5, 0.0), 3.0 * t_cl / 4.0),
    ];
    let mut rhs = vec![Complex64::ZERO; state0.coeffs().len()];
    for (w, dt) in parts {
        let pkt = classical_packet(state0, t + dt);
        for (r, c) in rhs.iter_mut().zip(pkt.coeffs()) {
            *r += w * c;
        }
    }
    // align the unobservable global phase before differencing
    let ip: Complex64 = rhs
        .iter()
        .zip(lhs.coeffs())
        .map(|(r, l)| r.conj() * l)
        .sum();
    let phase = if ip.norm() > 0.0 {
        ip / ip.norm()
    } else {
        Complex64::ONE
    };
    let aligned: Vec<Complex64> = rhs.iter().map(|r| r * phase).collect();
    Ok(l2_diff(lhs.coeffs(), &aligned))
}

/// Least-squares fit of the state at (r/s) T_rev onto the l classical packets
/// chi_cl(t - p T_cl / l).
pub fn clone_decomposition(
    state0: &CoefficientState,
    frac: FractionalTime,
) -> Result<CloneDecomposition> {
    let p = state0.params();
    require_integer(p.eta(), "rho+kappa")?;
    let l = frac.clone_count();
    let t = frac.value() * p.t_rev();
    let t_cl = p.t_cl();
    let target = state0.evolve(t);
    let packets: Vec<CoefficientState> = (0..l)
        .map(|k| classical_packet(state0, t - k as f64 * t_cl / l as f64))
        .collect();
    // normal equations on the l x l Gram matrix
    let mut gram = vec![vec![Complex64::ZERO; l]; l];
    let mut rhs = vec![Complex64::ZERO; l];
    for i in 0..l {
        for j in 0..l {
            gram[i][j] = overlap_coeff(&packets[i], &packets[j])?;
        }
        rhs[i] = overlap_coeff(&packets[i], &target)?;
    }
    let amplitudes = solve_complex(&mut gram, &mut rhs)?;
    // residual of the reconstruction
    let mut recon = vec![Complex64::ZERO; target.coeffs().len()];
    for (k, pkt) in packets.iter().enumerate() {
        for (r, c) in recon.iter_mut().zip(pkt.coeffs()) {
            *r += amplitudes[k] * c;
        }
    }
    let residual = l2_diff(target.coeffs(), &recon);
    let phase_offsets = (0..l).map(|k| k as f64 / l as f64).collect();
    Ok(CloneDecomposition {
        amplitudes,
        phase_offsets,
        residual,
    })
}

/// Gaussian elimination with partial pivoting for the small clone systems.
fn solve_complex(a: &mut [Vec<Complex64>], b: &mut [Complex64]) -> Result<Vec<Complex64>> {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[piv][col].norm() < 1e-10 * scale.max(1.0) {
            return Err(PtError::RankDeficient(format!(
                "pivot {:.3e} at column {col}; classical packets nearly collinear",
                a[piv][col].norm()
            )));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![Complex64::ZERO; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}
