//! Energy with the cubic correction that makes it almost conserved for
//! symmetric quasilinear coefficients.

use num_complex::Complex64;

use super::derivative;
use crate::dyadic::SpectralField;
use crate::error::{Error, Result};
use crate::linear_flow::{vector_fields, DiagnosticCaps};
use crate::params::SystemParams;

/// `Σ_{|μ|<=order} ∫ Σ_α (|∂_tΓ^μu_α|² + b_α²|Γ^μu_α|² + c_α²|∇Γ^μu_α|²)
/// + Σ_{αβjk} S^{jk}_{αβ} ∂_jΓ^μu_α ∂_kΓ^μu_β`, with `u` and `∂_t u` given by
/// their Fourier data.
pub fn symmetrized_energy(
    u: &[SpectralField],
    ut: &[SpectralField],
    p: &SystemParams,
    order: usize,
    caps: &DiagnosticCaps,
) -> Result<f64> {
    let d = p.dim();
    if u.len() != d || ut.len() != d {
        return Err(Error::Validation(format!(
            "expected {d} components, got {} and {}",
            u.len(),
            ut.len()
        )));
    }
    let mut words_u = Vec::with_capacity(d);
    let mut energy = 0.0;
    for a in 0..d {
        let wu = vector_fields(&u[a], order, caps)?;
        let wt = vector_fields(&ut[a], order, caps)?;
        let (b, c) = (p.mass(a), p.speed(a));
        for ((_, gu), (_, gt)) in wu.iter().zip(&wt) {
            let grad: f64 = (0..3).map(|j| derivative(gu, &[j]).l2_norm().powi(2)).sum();
            energy += gt.l2_norm().powi(2) + b * b * gu.l2_norm().powi(2) + c * c * grad;
        }
        words_u.push(wu);
    }
    if !p.has_quasilinear() {
        return Ok(energy);
    }
    let grid = u[0].grid();
    let len = grid.len();
    let cell = grid.dx().powi(3);
    let phys = |f: &SpectralField, axes: &[usize]| -> Vec<f64> {
        derivative(f, axes).to_physical().iter().map(|v| v.re).collect()
    };
    let values: Vec<Vec<f64>> = u.iter().map(|f| phys(f, &[])).collect();
    let firsts: Vec<Vec<Vec<f64>>> = u.iter().map(|f| (0..3).map(|l| phys(f, &[l])).collect()).collect();
    // S^{jk}_{αβ}(x), only the nonzero ones
    let mut coef = Vec::new();
    for a in 0..d {
        for b in 0..d {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s: Option<Vec<f64>> = None;
                    for g in 0..d {
                        let cu = p.quad_u(a, b, g, j, k);
                        if cu != 0.0 {
                            let acc = s.get_or_insert_with(|| vec![0.0; len]);
                            acc.iter_mut().zip(&values[g]).for_each(|(o, v)| *o += cu * v);
                        }
                        for l in 0..3 {
                            let cd = p.quad_du(a, b, g, j, k, l);
                            if cd != 0.0 {
                                let acc = s.get_or_insert_with(|| vec![0.0; len]);
                                acc.iter_mut().zip(&firsts[g][l]).for_each(|(o, v)| *o += cd * v);
                            }
                        }
                    }
                    if let Some(s) = s {
                        coef.push((a, b, j, k, s));
                    }
                }
            }
        }
    }
    let words = words_u[0].len();
    for w in 0..words {
        let grads: Vec<Vec<Vec<Complex64>>> = words_u
            .iter()
            .map(|wu| (0..3).map(|j| derivative(&wu[w].1, &[j]).to_physical()).collect())
            .collect();
        for &(a, b, j, k, ref s) in &coef {
            let sum: f64 = s
                .iter()
                .zip(grads[a][j].iter().zip(&grads[b][k]))
                .map(|(s, (x, y))| s * (x * y).re)
                .sum();
            energy += sum * cell;
        }
    }
    Ok(energy)
}
