//! Eigendecomposition of real symmetric tridiagonal matrices by the implicit
//! QL method with Wilkinson shifts, accumulating eigenvectors.

use crate::error::{PtError, Result};

/// Eigenvalues (ascending) and eigenvectors (columns of `vectors`) of the
/// tridiagonal matrix with diagonal `diag` and sub/super-diagonal `off`.
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Column k is the eigenvector of values[k]; row-major n x n.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl TridiagEigen {
    pub fn vector(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.vectors[i * self.n + k])
    }
}

pub fn tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n, "off-diagonal must have length n-1");
    let mut d = diag.to_vec();
    // e is padded so e[l] pairs rows (l, l+1)
    let mut e: Vec<f64> = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0f64; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a negligible off-diagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(PtError::Convergence(
                    "tridiagonal QL exceeded 64 iterations".into(),
                ));
            }
            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, permuting vector columns
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0f64; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = z[row * n + old_col];
        }
    }
    Ok(TridiagEigen { values, vectors, n })
}
