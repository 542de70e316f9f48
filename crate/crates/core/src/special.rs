//! Special functions and quadrature rules used across the crate.

use std::f64::consts::PI;

/// Legendre polynomials `P_0..=P_n` at `x`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n == 0 {
        return p;
    }
    p.push(x);
    for q in 2..=n {
        let qf = q as f64;
        let v = ((2.0 * qf - 1.0) * x * p[q - 1] - (qf - 1.0) * p[q - 2]) / qf;
        p.push(v);
    }
    p
}

/// Real orthonormal spherical harmonics up to degree `qmax` at the unit
/// vector `(x, y, z)`, ordered by degree then `m = 0, 1c, 1s, 2c, 2s, ...`.
pub fn real_harmonics(qmax: usize, dir: [f64; 3]) -> Vec<f64> {
    let [x, y, z] = dir;
    let ct = z.clamp(-1.0, 1.0);
    let st = (x * x + y * y).sqrt();
    let phi = y.atan2(x);
    let n = qmax + 1;
    // normalized associated Legendre P̄_l^m, indexed [l][m]
    let mut p = vec![vec![0.0; n]; n];
    p[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..n {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st * p[m - 1][m - 1];
    }
    for m in 0..n {
        if m + 1 < n {
            p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * ct * p[m][m];
        }
        for l in (m + 2)..n {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (ct * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    let mut out = Vec::with_capacity(n * n);
    let s2 = 2f64.sqrt();
    for l in 0..n {
        out.push(p[l][0]);
        for m in 1..=l {
            let (s, c) = (m as f64 * phi).sin_cos();
            out.push(s2 * p[l][m] * c);
            out.push(s2 * p[l][m] * s);
        }
    }
    out
}

/// Spherical Bessel functions `j_0..=j_n` at `x >= 0`.
pub fn spherical_bessel_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-3 {
        // leading series terms
        let mut term = 1.0;
        for (q, o) in out.iter_mut().enumerate() {
            if q > 0 {
                term *= x / (2.0 * q as f64 + 1.0);
            }
            let corr = 1.0 - x * x / (2.0 * (2.0 * q as f64 + 3.0));
            *o = term * corr;
        }
        return out;
    }
    let j0 = x.sin() / x;
    if (n as f64) < x {
        // upward recurrence is stable while q < x
        out[0] = j0;
        if n >= 1 {
            out[1] = x.sin() / (x * x) - x.cos() / x;
        }
        for q in 1..n {
            out[q + 1] = (2.0 * q as f64 + 1.0) / x * out[q] - out[q - 1];
        }
        return out;
    }
    // Miller's downward recurrence, normalized against j_0 or j_1
    let start = n + 20 + (x.sqrt() * 10.0) as usize;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut tmp = vec![0.0; n + 1];
    for q in (1..=start).rev() {
        let prev = (2.0 * q as f64 + 1.0) / x * cur - next;
        next = cur;
        cur = prev;
        if q - 1 <= n {
            tmp[q - 1] = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            for t in tmp.iter_mut() {
                *t *= 1e-250;
            }
        }
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() > j1.abs() || n == 0 {
        j0 / tmp[0]
    } else {
        j1 / tmp[1]
    };
    for (o, t) in out.iter_mut().zip(&tmp) {
        *o = t * scale;
    }
    out
}

/// Single spherical Bessel function `j_n(x)`.
pub fn spherical_bessel(n: usize, x: f64) -> f64 {
    spherical_bessel_all(n, x)[n]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
