//! Small dense real polynomials, coefficients stored lowest degree first.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

pub fn eval_deriv(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, v)| acc * x + k as f64 * v)
}

fn eval_c(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for v in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + v;
    }
    (p, dp)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Divides by the monic linear factor `(x - r)`, dropping the remainder.
pub fn deflate(c: &[f64], r: f64) -> (Vec<f64>, f64) {
    let n = c.len() - 1;
    let mut q = vec![0.0; n];
    let mut acc = c[n];
    for k in (0..n).rev() {
        q[k] = acc;
        acc = c[k] + acc * r;
    }
    (q, acc)
}

/// All complex roots by Aberth-Ehrlich iteration.
pub fn roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let mut c = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = c[n];
    // Cauchy-type radius for the starting circle
    let radius = 1.0 + c[..n].iter().map(|v| (v / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval_c(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|j| *j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    // clustered roots converge only linearly; accept residuals at rounding level
    let settled = z.iter().all(|zi| {
        let bound: f64 = c.iter().rev().fold(0.0, |acc, v| acc * zi.norm() + v.abs());
        eval_c(&c, *zi).0.norm() <= 1e-13 * bound
    });
    if settled {
        return Ok(z);
    }
    Err(Error::Numerical("polynomial root iteration did not converge".into()))
}
