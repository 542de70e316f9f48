//! The free flow `e^{itΛ_σ}`, the vector fields `Γ = (∂_i, Ω_ij)`,
//! dispersive decay measurements and the capped Z diagnostic.

pub mod decay;
pub mod harmonic;
pub mod presets;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{admissible, SpectralField};
use crate::error::{Error, Result};
use crate::params::{SignedIndex, SystemParams};

pub use decay::{decay_fit, DecayFit, DecayLocalization, DecayOptions};
pub use harmonic::{HarmonicProfile, SupOptions};
pub use presets::{angular_gain, run_preset, AngularGain, DecayPreset, PresetReport};

/// Multiplies every Fourier coefficient by `exp(i t Λ_σ(ξ))`.
pub fn propagate(f: &SpectralField, p: &SystemParams, sigma: SignedIndex, t: f64) -> SpectralField {
    f.apply_radial_multiplier_complex(|r| Complex64::from_polar(1.0, t * p.dispersion_sq(sigma, r * r)))
}

/// Desk-scale stand-ins for the proof parameters `N`, `N₀` and `K₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticCaps {
    pub n_sub: u32,
    pub n0_sub: f64,
    /// Largest word length `|μ|` of vector fields.
    pub gamma_order: usize,
    /// `|k| >= k0` selects the high/low branch of the diagnostic.
    pub k0: i32,
}

impl Default for DiagnosticCaps {
    fn default() -> Self {
        DiagnosticCaps {
            n_sub: 8,
            n0_sub: 4.0,
            gamma_order: 2,
            k0: 10,
        }
    }
}

impl DiagnosticCaps {
    pub fn validate(&self) -> Result<()> {
        if self.n_sub == 0 || !(self.n0_sub > 0.0) || self.k0 <= 0 {
            return Err(Error::Validation(format!("diagnostic caps must be positive: {self:?}")));
        }
        if self.gamma_order > self.n_sub as usize / 2 + 2 {
            return Err(Error::Validation(format!(
                "vector-field order {} exceeds N/2 + 2 = {}",
                self.gamma_order,
                self.n_sub / 2 + 2
            )));
        }
        Ok(())
    }
}

/// One generator of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorField {
    /// `∂_i`.
    Partial(usize),
    /// `Ω_ij = x_i ∂_j - x_j ∂_i` with `i < j`.
    Rotation(usize, usize),
}

impl VectorField {
    pub const ALL: [VectorField; 6] = [
        VectorField::Partial(0),
        VectorField::Partial(1),
        VectorField::Partial(2),
        VectorField::Rotation(0, 1),
        VectorField::Rotation(0, 2),
        VectorField::Rotation(1, 2),
    ];

    pub fn apply(self, f: &SpectralField) -> SpectralField {
        match self {
            VectorField::Partial(i) => partial(f, i),
            VectorField::Rotation(i, j) => {
                let dj = partial(f, j).to_physical();
                let di = partial(f, i).to_physical();
                let g = f.grid();
                let vals = (0..g.len())
                    .map(|idx| {
                        let x = g.position(idx);
                        dj[idx] * x[i] - di[idx] * x[j]
                    })
                    .collect();
                SpectralField::from_physical(g, vals).expect("length matches grid")
            }
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Partial(i) => write!(f, "d{}", i + 1),
            VectorField::Rotation(i, j) => write!(f, "O{}{}", i + 1, j + 1),
        }
    }
}

/// Spectral `∂_i`; the Nyquist plane is dropped so real fields stay real.
fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let g = f.grid();
    let n = g.n();
    let mut out = f.clone();
    for (idx, v) in out.coefficients_mut().iter_mut().enumerate() {
        let a = g.split(idx)[axis];
        *v *= if 2 * a == n {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, g.freq(a))
        };
    }
    out
}

/// A word `Γ^μ`, applied right to left.
pub type Word = Vec<VectorField>;

/// All `Γ^μ f` with `|μ| <= order`, the empty word first.
pub fn vector_fields(f: &SpectralField, order: usize, caps: &DiagnosticCaps) -> Result<Vec<(Word, SpectralField)>> {
    if order > caps.gamma_order {
        return Err(Error::Validation(format!(
            "vector-field order {order} exceeds the cap {}",
            caps.gamma_order
        )));
    }
    let mut out = vec![(Vec::new(), f.clone())];
    let mut frontier = 0;
    for _ in 0..order {
        let end = out.len();
        for w in frontier..end {
            for v in VectorField::ALL {
                let field = v.apply(&out[w].1);
                let mut word = vec![v];
                word.extend_from_slice(&out[w].0);
                out.push((word, field));
            }
        }
        frontier = end;
    }
    Ok(out)
}

/// `⟨j⟩ = sqrt(1 + j²)`.
pub fn japanese(j: f64) -> f64 {
    (1.0 + j * j).sqrt()
}

/// The `Z_{jk}` expression for an already localized piece `f`, with the proof
/// parameters replaced by `caps`. A scaled comparison tool, not the norm
/// itself.
pub fn z_diagnostic(f: &SpectralField, j: i32, k: i32, caps: &DiagnosticCaps) -> Result<f64> {
    caps.validate()?;
    if !admissible(j, k) {
        return Err(Error::Domain(format!(
            "(j, k) = ({j}, {k}) outside the admissible set j >= 0, j + k >= 0"
        )));
    }
    let words = vector_fields(f, caps.gamma_order, caps)?;
    let jf = j as f64;
    let weight = japanese(jf).powf(caps.n0_sub);
    let value = words
        .iter()
        .map(|(_, g)| z_branch(g.l2_norm(), g.fourier_l1_norm(), jf, k, weight, caps.k0))
        .fold(0.0, f64::max);
    Ok(value)
}

/// One word's contribution given its `L²` and Fourier-`L¹` norms.
pub fn z_branch(l2: f64, fourier_l1: f64, j: f64, k: i32, weight: f64, k0: i32) -> f64 {
    if k.abs() >= k0 {
        weight * 2f64.powf((k as f64 / 2.0).min(0.0)) * 2f64.powf(j) * l2
    } else {
        2f64.powf(5.0 * j / 6.0) / weight * l2 + weight * 2f64.powf(j) * fourier_l1
    }
}
