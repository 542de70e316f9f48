use std::f64::consts::PI;

use super::{bump, SUPPORT};
use crate::special::legendre_all;

/// Zonal kernel of the angular band `l`:
/// `K_l(cos θ) = Σ_q φ(2^{-l} q) (2q + 1)/(4π) P_q(cos θ)`.
pub fn zonal_kernel(l: u32, cos_angle: f64) -> f64 {
    let scale = 2f64.powi(l as i32);
    let qmax = (SUPPORT * scale).floor() as usize;
    let p = legendre_all(qmax, cos_angle.clamp(-1.0, 1.0));
    (0..=qmax)
        .map(|q| bump(q as f64 / scale) * (2.0 * q as f64 + 1.0) / (4.0 * PI) * p[q])
        .sum()
}

/// `min(2^{2l}, 2^{-l} |θ - θ'|^{-3})` with the chordal distance between the
/// two unit vectors.
pub fn zonal_envelope(l: u32, cos_angle: f64) -> f64 {
    let chord = (2.0 - 2.0 * cos_angle.clamp(-1.0, 1.0)).max(0.0).sqrt();
    let near = 4f64.powi(l as i32);
    if chord == 0.0 {
        return near;
    }
    near.min(2f64.powi(-(l as i32)) / chord.powi(3))
}

/// Largest ratio `|K_l| / envelope` over `samples` angles in `(0, π]`.
pub fn zonal_bound_constant(l: u32, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| {
            let th = PI * i as f64 / samples as f64;
            let c = th.cos();
            zonal_kernel(l, c).abs() / zonal_envelope(l, c)
        })
        .fold(0.0, f64::max)
}
