//! Bilinear integrals of radial profiles reduced to the `(ρ, τ)` plane.
//!
//! For `ρ = |ξ - η|`, `τ = |η|` and `λ = |ξ| > 0`, the volume element is
//! `dη = (2π/λ) ρ τ dρ dτ` on the triangle `|ρ - τ| <= λ <= ρ + τ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialOptions {
    pub tau_panels: usize,
    pub rho_panels: usize,
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            tau_panels: 200,
            rho_panels: 200,
            order: 8,
        }
    }
}

/// A radial profile with its support `[lo, hi]`.
pub struct Radial<'a> {
    pub profile: &'a dyn Fn(f64) -> Complex64,
    pub support: (f64, f64),
}

fn panels(lo: f64, hi: f64, n: usize, x: &[f64], w: &[f64], mut f: impl FnMut(f64, f64)) {
    let h = (hi - lo) / n as f64;
    for p in 0..n {
        let c = lo + h * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(w) {
            f(c + 0.5 * h * xi, 0.5 * h * wi);
        }
    }
}

/// `∫ K(|ξ-η|, |η|, λ) F(|ξ-η|) G(|η|) dη` at `|ξ| = λ`.
pub fn radial_bilinear(
    f: &Radial,
    g: &Radial,
    kernel: impl Fn(f64, f64, f64) -> f64,
    lambda: f64,
    o: &RadialOptions,
) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("output magnitude λ = {lambda} must be positive")));
    }
    let (x, w) = gauss_legendre(o.order);
    let (glo, ghi) = g.support;
    let (flo, fhi) = f.support;
    let mut total = Complex64::new(0.0, 0.0);
    panels(glo.max(0.0), ghi, o.tau_panels, &x, &w, |tau, wt| {
        let gv = (g.profile)(tau);
        if gv == Complex64::new(0.0, 0.0) {
            return;
        }
        let lo = flo.max((lambda - tau).abs());
        let hi = fhi.min(lambda + tau);
        if hi <= lo {
            return;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        panels(lo, hi, o.rho_panels, &x, &w, |rho, wr| {
            inner += (f.profile)(rho) * (rho * kernel(rho, tau, lambda) * wr);
        });
        total += inner * gv * (tau * wt);
    });
    Ok(total * (2.0 * PI / lambda))
}

/// Midpoint-rule convolution `∫ F(|ξ-η|) G(|η|) dη` over `[-half, half]^3`
/// with `n` cells per axis; the brute-force reference for the reduction.
pub fn grid_convolution(
    f: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    xi: [f64; 3],
    n: usize,
    half: f64,
) -> Complex64 {
    let h = 2.0 * half / n as f64;
    let c = |i: usize| -half + (i as f64 + 0.5) * h;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let e = [c(i), c(j), c(k)];
                let t = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
                let gv = g(t);
                if gv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d = [xi[0] - e[0], xi[1] - e[1], xi[2] - e[2]];
                total += f((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()) * gv;
            }
        }
    }
    total * h.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(lo: f64, hi: f64) -> impl Fn(f64) -> Complex64 {
        move |r| Complex64::new(if r >= lo && r <= hi { 1.0 } else { 0.0 }, 0.0)
    }

    #[test]
    fn vanishing_profile() {
        let one = indicator(1.0, 2.0);
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        let f = Radial { profile: &one, support: (1.0, 2.0) };
        let g = Radial { profile: &zero, support: (1.0, 2.0) };
        let v = radial_bilinear(&f, &g, |_, _, _| 1.0, 1.0, &RadialOptions::default()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        assert!(radial_bilinear(&f, &g, |_, _, _| 1.0, 0.0, &RadialOptions::default()).is_err());
    }

    #[test]
    fn shell_pair_closed_form() {
        // at λ = 1 the whole square [1,2]^2 is admissible: 2π (3/2)^2
        let one = indicator(1.0, 2.0);
        let f = Radial { profile: &one, support: (1.0, 2.0) };
        let v = radial_bilinear(&f, &f, |_, _, _| 1.0, 1.0, &RadialOptions::default()).unwrap();
        assert!((v.re - 4.5 * PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn ball_volume_squared() {
        let one = indicator(0.0, 1.0);
        let f = Radial { profile: &one, support: (0.0, 1.0) };
        let o = RadialOptions {
            tau_panels: 400,
            rho_panels: 2,
            order: 8,
        };
        let (x, w) = gauss_legendre(16);
        let mut total = 0.0;
        let panels_l = 16;
        for p in 0..panels_l {
            let h = 2.0 / panels_l as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let l = h * (p as f64 + 0.5 + 0.5 * xi);
                let v = radial_bilinear(&f, &f, |_, _, _| 1.0, l, &o).unwrap().re;
                total += 4.0 * PI * l * l * v * 0.5 * h * wi;
            }
        }
        let ball = 4.0 * PI / 3.0;
        // the τ integrand has kinks at τ = |1 - λ|, so agreement is algebraic
        assert!((total - ball * ball).abs() < 1e-5 * ball * ball, "{total}");
    }

    #[test]
    fn halving_the_window_shrinks_the_output() {
        // kernel restricted to |Λ(λ) - Λ(ρ) - Λ(τ) + 1| <= ε, a level set
        // through the interior of the support
        let lam = |x: f64| (x * x + 1.0).sqrt();
        let one = indicator(0.5, 2.0);
        let f = Radial { profile: &one, support: (0.5, 2.0) };
        let o = RadialOptions {
            tau_panels: 100,
            rho_panels: 100,
            order: 4,
        };
        let agg = |eps: f64| -> f64 {
            let mut s = 0.0;
            for i in 0..40 {
                let l = 0.5 + 0.05 * i as f64;
                let v = radial_bilinear(
                    &f,
                    &f,
                    |r, t, l| if (lam(l) - lam(r) - lam(t) + 1.0).abs() <= eps { 1.0 } else { 0.0 },
                    l,
                    &o,
                )
                .unwrap();
                s += v.norm_sqr() * l * l;
            }
            s.sqrt()
        };
        for eps in [0.2, 0.1, 0.05] {
            let r = agg(eps) / agg(eps / 2.0);
            assert!(r >= 2f64.sqrt() * 0.8, "ε = {eps}: ratio {r}");
        }
    }
}
