//! Special-function kernels: log-gamma, Jacobi polynomial recurrence, and
//! Gauss-Legendre quadrature nodes.

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    libm::lgamma(x)
}

/// Evaluate P_k^{(a,b)}(u) for all k = 0..=nmax at a single point using the
/// three-term recurrence in the degree.
///
/// The caller supplies a closure that consumes (k, P_k); this keeps the loop
/// allocation-free for hot paths like wavefunction synthesis.
pub fn jacobi_scan<F: FnMut(usize, f64)>(nmax: usize, a: f64, b: f64, u: f64, mut f: F) {
    let mut p_prev = 1.0;
    f(0, p_prev);
    if nmax == 0 {
        return;
    }
    let mut p = (a + 1.0) + (a + b + 2.0) * (u - 1.0) / 2.0;
    f(1, p);
    for k in 2..=nmax {
        let n = k as f64;
        let c1 = 2.0 * n * (n + a + b) * (2.0 * n + a + b - 2.0);
        let c2 = (2.0 * n + a + b - 1.0) * (2.0 * n + a + b) * (2.0 * n + a + b - 2.0);
        let c3 = (2.0 * n + a + b - 1.0) * (a * a - b * b);
        let c4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * (2.0 * n + a + b);
        let next = ((c2 * u + c3) * p - c4 * p_prev) / c1;
        p_prev = p;
        p = next;
        f(k, p);
    }
}

/// P_n^{(a,b)}(u) at a single point.
pub fn jacobi(n: usize, a: f64, b: f64, u: f64) -> f64 {
    let mut out = 0.0;
    jacobi_scan(n, a, b, u, |k, v| {
        if k == n {
            out = v;
        }
    });
    out
}

/// Derivative d/du P_n^{(a,b)}(u) via the degree-lowering identity
/// P_n' = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}.
pub fn jacobi_deriv(n: usize, a: f64, b: f64, u: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    0.5 * (n as f64 + a + b + 1.0) * jacobi(n - 1, a + 1.0, b + 1.0, u)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes are computed for the
/// upper half and mirrored, so the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // derivative of P_n from P_n and P_{n-1}
            dp = (n as f64) * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}
