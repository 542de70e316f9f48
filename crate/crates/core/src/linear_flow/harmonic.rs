//! Free flow of zonal data `g(|x|) P_q(cos ∠(x, e₃))` through one-dimensional
//! Hankel integrals, for times and scales no periodic grid can hold.
//!
//! With `ĝ(ρ) = 4π ∫ g(r) j_q(ρr) r² dr` the Fourier transform is
//! `(-i)^q ĝ(|ξ|) P_q(cos ∠(ξ, e₃))` and the evolved field is
//! `P_q(cos ∠(x, e₃)) U(t, |x|)` with
//! `U(t, r) = (2π²)^{-1} ∫ j_q(ρr) e^{itΛ(ρ)} ĝ(ρ) ρ² dρ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{spatial_cutoff, DyadicShell};
use crate::error::{Error, Result};
use crate::params::{SignedIndex, SystemParams};
use crate::special::{gauss_legendre, legendre_all, spherical_bessel};

const ORDER: usize = 16;
/// Largest phase change across one Gauss-Legendre panel.
const PANEL_PHASE: f64 = 4.0;

fn bessel(q: usize, x: f64) -> f64 {
    if q == 0 {
        if x < 1e-4 {
            1.0 - x * x / 6.0
        } else {
            x.sin() / x
        }
    } else {
        spherical_bessel(q, x)
    }
}

fn nodes(lo: f64, hi: f64, rate: f64, min_panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(ORDER);
    let panels = ((rate * (hi - lo) / PANEL_PHASE).ceil() as usize).max(min_panels);
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * ORDER);
    let mut ws = Vec::with_capacity(panels * ORDER);
    for p in 0..panels {
        let c = lo + h * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            xs.push(c + 0.5 * h * xi);
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

#[derive(Debug, Clone)]
enum Source {
    Gaussian { width: f64 },
    /// Nodes `r_i` and weights `w_i g(r_i) r_i²`.
    Tabulated { r: Vec<f64>, w: Vec<f64> },
}

/// Zonal data of degree `q`, stored through its radial profile.
#[derive(Debug, Clone)]
pub struct HarmonicProfile {
    degree: usize,
    source: Source,
    /// Frequency cutoff applied to `ĝ`.
    cut: Option<DyadicShell>,
    scale: f64,
    /// `ĝ` vanishes outside this interval.
    rho_support: (f64, f64),
    /// Radius of the physical support (effective for the Gaussian).
    radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupOptions {
    /// Samples per `π / ρ_max` when scanning for the maximum.
    pub samples_per_period: f64,
    /// Number of best samples refined by golden-section search.
    pub refine_best: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            samples_per_period: 4.0,
            refine_best: 3,
        }
    }
}

impl HarmonicProfile {
    /// `exp(-|x|² / (2 w²))`.
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Validation(format!("Gaussian width {width} must be positive")));
        }
        Ok(HarmonicProfile {
            degree: 0,
            source: Source::Gaussian { width },
            cut: None,
            scale: 1.0,
            rho_support: (0.0, 9.0 / width),
            radius: 9.0 * width,
        })
    }

    /// Radial profile `g` supported in `r_support`, of angular degree `q`,
    /// with its transform restricted to the support of `cut`.
    pub fn from_radial(
        degree: usize,
        g: impl Fn(f64) -> f64,
        r_support: (f64, f64),
        cut: DyadicShell,
    ) -> Result<Self> {
        let (lo, hi) = r_support;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Validation(format!("bad radial support {r_support:?}")));
        }
        let rho_support = cut.support();
        let rate = rho_support.1 + 2.0 * (degree as f64 + 1.0) / hi.max(1.0);
        let (r, w) = nodes(lo, hi, rate + 1.0, 8);
        let w = r.iter().zip(&w).map(|(r, w)| w * g(*r) * r * r).collect();
        Ok(HarmonicProfile {
            degree,
            source: Source::Tabulated { r, w },
            cut: Some(cut),
            scale: 1.0,
            rho_support,
            radius: hi,
        })
    }

    /// `f*_{jk}`-type data: the spatial cutoff at `2^j` times the degree-`q`
    /// plane-wave shell `j_q(2^k r)`, then cut to the frequency shell `2^k`.
    pub fn localized(degree: usize, j: i32, k: i32) -> Result<Self> {
        let spatial = DyadicShell::localized(j, k)?;
        let a = 2f64.powi(k);
        Self::from_radial(
            degree,
            |r| spatial_cutoff(j, k, r) * bessel(degree, a * r),
            spatial.support(),
            DyadicShell::Shell { k },
        )
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rho_support(&self) -> (f64, f64) {
        self.rho_support
    }

    pub fn scaled(&self, s: f64) -> Self {
        HarmonicProfile {
            scale: self.scale * s,
            ..self.clone()
        }
    }

    /// `ĝ(ρ)`.
    pub fn transform(&self, rho: f64) -> f64 {
        let cut = self.cut.map_or(1.0, |c| c.eval(rho));
        if cut == 0.0 {
            return 0.0;
        }
        let raw = match &self.source {
            Source::Gaussian { width } => {
                (2.0 * PI * width * width).powf(1.5) * (-0.5 * width * width * rho * rho).exp()
            }
            Source::Tabulated { r, w } => {
                4.0 * PI * r.iter().zip(w).map(|(r, w)| w * bessel(self.degree, rho * r)).sum::<f64>()
            }
        };
        self.scale * cut * raw
    }

    /// `ρ` nodes and weights resolving a phase that moves at `rate` per unit.
    fn rho_nodes(&self, rate: f64) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.rho_support;
        nodes(a, b, rate + self.radius + 1.0, 16)
    }

    /// `∫_{S²} |P_q(cos θ)| dω`.
    fn angular_l1(&self) -> f64 {
        let q = self.degree;
        let (x, w) = nodes(-1.0, 1.0, 2.0 * q as f64 + 2.0, 4);
        2.0 * PI * x.iter().zip(&w).map(|(x, w)| w * legendre_all(q, *x)[q].abs()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        let (rho, w) = self.rho_nodes(0.0);
        let s: f64 = rho.iter().zip(&w).map(|(r, w)| w * (self.transform(*r) * r).powi(2)).sum();
        let angular = 4.0 * PI / (2.0 * self.degree as f64 + 1.0);
        (s * angular).sqrt() / (2.0 * PI).powf(1.5)
    }

    /// `‖f̂‖_{L¹}`.
    pub fn fourier_l1_norm(&self) -> f64 {
        let (rho, w) = self.rho_nodes(0.0);
        let s: f64 = rho.iter().zip(&w).map(|(r, w)| w * self.transform(*r).abs() * r * r).sum();
        s * self.angular_l1()
    }

    /// Unit `L²` mass.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.l2_norm();
        if !(n > 0.0) {
            return Err(Error::Numerical("profile has zero mass".into()));
        }
        Ok(self.scaled(1.0 / n))
    }

    fn weighted_table(&self, p: &SystemParams, sigma: SignedIndex, t: f64, r_max: f64) -> (Vec<f64>, Vec<Complex64>) {
        let c = p.speed_of(sigma);
        let (rho, w) = self.rho_nodes(t.abs() * c + r_max);
        let vals = rho
            .iter()
            .zip(&w)
            .map(|(r, w)| {
                let phase = t * p.dispersion_sq(sigma, r * r);
                Complex64::from_polar(w * self.transform(*r) * r * r / (2.0 * PI * PI), phase)
            })
            .collect();
        (rho, vals)
    }

    /// `U(t, r)` at each requested radius.
    pub fn evolve(&self, p: &SystemParams, sigma: SignedIndex, t: f64, radii: &[f64]) -> Vec<Complex64> {
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        let (rho, vals) = self.weighted_table(p, sigma, t, r_max);
        radii.iter().map(|&r| radial_sum(self.degree, &rho, &vals, r)).collect()
    }

    /// Radii outside which the evolved field is negligible: the support
    /// transported with the extreme group velocities.
    pub fn window(&self, p: &SystemParams, sigma: SignedIndex, t: f64) -> (f64, f64) {
        let c = p.speed_of(sigma);
        let b = p.mass(sigma.component());
        let v = |rho: f64| c * c * rho / (c * c * rho * rho + b * b).sqrt();
        let (lo, hi) = self.rho_support;
        let near = if matches!(self.source, Source::Gaussian { .. }) {
            self.radius
        } else {
            self.radius + 4.0 / lo.max(1e-3)
        };
        ((t.abs() * v(lo) - near).max(0.0), t.abs() * v(hi) + near)
    }

    /// `sup_x |e^{itΛ} f(x)|`.
    pub fn sup_norm(&self, p: &SystemParams, sigma: SignedIndex, t: f64, o: &SupOptions) -> f64 {
        let (lo, hi) = self.window(p, sigma, t);
        let h = PI / (self.rho_support.1 * o.samples_per_period);
        let count = ((hi - lo) / h).ceil() as usize + 1;
        let radii: Vec<f64> = (0..count).map(|i| (lo + i as f64 * h).min(hi)).collect();
        let (rho, vals) = self.weighted_table(p, sigma, t, hi + h);
        let at = |r: f64| radial_sum(self.degree, &rho, &vals, r).norm();
        let samples: Vec<f64> = radii.iter().map(|r| at(*r)).collect();
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|a, b| samples[*b].partial_cmp(&samples[*a]).unwrap());
        let mut best = samples[order[0]];
        for &i in order.iter().take(o.refine_best) {
            let (mut a, mut b) = ((radii[i] - h).max(0.0), radii[i] + h);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
            let (mut f1, mut f2) = (at(x1), at(x2));
            for _ in 0..40 {
                if f1 > f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = at(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = at(x2);
                }
            }
            best = best.max(f1).max(f2);
        }
        best
    }
}

fn radial_sum(q: usize, rho: &[f64], vals: &[Complex64], r: f64) -> Complex64 {
    rho.iter().zip(vals).map(|(k, v)| v * bessel(q, k * r)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{Grid, SpectralField};
    use crate::params::SystemBuilder;

    fn unit() -> (SystemParams, SignedIndex) {
        (
            SystemBuilder::new(vec![1.0], vec![1.0]).build().unwrap(),
            SignedIndex::new(1, 1).unwrap(),
        )
    }

    #[test]
    fn gaussian_mass_and_inverse() {
        let (p, s) = unit();
        let w = 1.3;
        let g = HarmonicProfile::gaussian(w).unwrap();
        let exact = (PI * w * w).powf(0.75);
        assert!((g.l2_norm() - exact).abs() < 1e-10 * exact);
        let back = g.evolve(&p, s, 0.0, &[0.0, 0.7, 2.0]);
        for (r, v) in [0.0f64, 0.7, 2.0].iter().zip(back) {
            assert!((v.re - (-r * r / (2.0 * w * w)).exp()).abs() < 1e-10, "{r} {v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_transform_inverts() {
        // a profile whose transform lies well inside the cut, for q = 0 and 3
        let (p, s) = unit();
        for q in [0usize, 3] {
            let g = |r: f64| r.powi(q as i32) * (-r * r / 2.0).exp();
            let prof = HarmonicProfile::from_radial(q, g, (0.0, 12.0), DyadicShell::UpTo { b: 4 }).unwrap();
            let back = prof.evolve(&p, s, 0.0, &[0.5, 1.5, 3.0]);
            for (r, v) in [0.5, 1.5, 3.0].iter().zip(back) {
                assert!((v.re - g(*r)).abs() < 1e-9 * g(1.0), "q={q} r={r}: {v} vs {}", g(*r));
            }
        }
    }

    #[test]
    fn angular_mass_factor() {
        // ‖r^q e^{-r²/2} P_q‖² = 4π/(2q+1) Γ(q + 3/2)/2
        for q in [0usize, 2, 7] {
            let g = |r: f64| r.powi(q as i32) * (-r * r / 2.0).exp();
            let f = HarmonicProfile::from_radial(q, g, (0.0, 12.0), DyadicShell::UpTo { b: 4 }).unwrap();
            let gamma = PI.sqrt() * (0..=q).map(|i| i as f64 + 0.5).product::<f64>();
            let exact = (4.0 * PI / (2.0 * q as f64 + 1.0) * gamma / 2.0).sqrt();
            assert!((f.l2_norm() - exact).abs() < 1e-9 * exact, "q={q}: {} vs {exact}", f.l2_norm());
        }
        let loc = HarmonicProfile::localized(5, 3, 0).unwrap().normalized().unwrap();
        assert!((loc.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_matches_the_grid() {
        let (p, s) = unit();
        let w = 2.0;
        let g = Grid::new(64, 64.0).unwrap();
        let f = SpectralField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w * w)).exp(), 0.0)
        });
        let h = HarmonicProfile::gaussian(w).unwrap();
        for t in [0.0, 5.0, 12.0] {
            let grid = super::super::propagate(&f, &p, s, t).sup_norm(8);
            let radial = h.sup_norm(&p, s, t, &SupOptions::default());
            assert!((grid - radial).abs() < 1e-4 * radial, "t={t}: {grid} vs {radial}");
        }
    }
}
