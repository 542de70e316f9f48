//! Three-wave phases `Φ(ξ, η) = Λ_σ(ξ) - Λ_μ(ξ - η) - Λ_ν(η)` and their
//! resonance geometry.

pub mod expansion;
pub mod factor;
pub mod lowfreq;
pub mod poly;
pub mod resonance;
pub mod sublevel;

pub use expansion::{expansion_at_q_zero, ExpansionFit, ExpansionOptions};
pub use factor::{factor_dbeta, FactorAt, Factorization, QuarticFactorization};
pub use lowfreq::{classify_low_freq, CaseLabel, DegenerateReport};
pub use resonance::{spacetime_resonances, ResonanceKind, ResonanceOptions, ResonancePoint, ResonanceSet, SearchBox};
pub use sublevel::{sublevel_measure, SublevelOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{PhaseTriple, SignedIndex, SystemParams};

/// One signed dispersion branch `s sqrt(c^2 x^2 + b^2)` on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub sign: f64,
    pub speed: f64,
    pub mass: f64,
}

impl Branch {
    pub fn of(p: &SystemParams, idx: SignedIndex) -> Self {
        Branch {
            sign: idx.sign(),
            speed: p.speed_of(idx),
            mass: p.mass(idx.component()),
        }
    }

    /// Derivatives of orders `0..=4` at `x`.
    pub fn derivs(&self, x: f64) -> [f64; 5] {
        let (c, b) = (self.speed, self.mass);
        let c2 = c * c;
        let b2 = b * b;
        let g2 = c2 * x * x + b2;
        let g = g2.sqrt();
        let s = self.sign;
        [
            s * g,
            s * c2 * x / g,
            s * c2 * b2 / (g2 * g),
            -s * 3.0 * c2 * c2 * b2 * x / (g2 * g2 * g),
            -s * 3.0 * c2 * c2 * b2 * (b2 - 4.0 * c2 * x * x) / (g2 * g2 * g2 * g),
        ]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.sign * (self.speed * self.speed * x * x + self.mass * self.mass).sqrt()
    }

    pub fn d1(&self, x: f64) -> f64 {
        let c2 = self.speed * self.speed;
        self.sign * c2 * x / (c2 * x * x + self.mass * self.mass).sqrt()
    }
}

/// The three branches of a triple.
#[derive(Debug, Clone, Copy)]
pub struct TripleBranches {
    pub sigma: Branch,
    pub mu: Branch,
    pub nu: Branch,
}

impl TripleBranches {
    pub fn new(p: &SystemParams, t: &PhaseTriple) -> Self {
        TripleBranches {
            sigma: Branch::of(p, t.sigma),
            mu: Branch::of(p, t.mu),
            nu: Branch::of(p, t.nu),
        }
    }

    /// `Φ⁺(α, β) = Λ_σ(α) - Λ_μ(α - β) - Λ_ν(β)`.
    pub fn parallel(&self, alpha: f64, beta: f64) -> f64 {
        self.sigma.value(alpha) - self.mu.value(alpha - beta) - self.nu.value(beta)
    }

    /// `∂_β Φ⁺`.
    pub fn parallel_dbeta(&self, alpha: f64, beta: f64) -> f64 {
        self.mu.d1(alpha - beta) - self.nu.d1(beta)
    }

    /// `∂_α Φ⁺`.
    pub fn parallel_dalpha(&self, alpha: f64, beta: f64) -> f64 {
        self.sigma.d1(alpha) - self.mu.d1(alpha - beta)
    }

    /// `∂_β^n Φ⁺` for `n = 0..=4`.
    pub fn parallel_derivs(&self, alpha: f64, beta: f64) -> [f64; 5] {
        let m = self.mu.derivs(alpha - beta);
        let n = self.nu.derivs(beta);
        let mut out = [0.0; 5];
        out[0] = self.sigma.value(alpha) - m[0] - n[0];
        for k in 1..5 {
            // d/dβ of Λ_μ(α - β) brings (-1)^k
            let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
            out[k] = -sgn * m[k] - n[k];
        }
        out
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn eval_phase(p: &SystemParams, t: &PhaseTriple, xi: &[f64; 3], eta: &[f64; 3]) -> f64 {
    p.dispersion(t.sigma, xi) - p.dispersion(t.mu, &sub(xi, eta)) - p.dispersion(t.nu, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDerivatives {
    pub value: f64,
    pub grad_eta: [f64; 3],
    pub hess_eta: [[f64; 3]; 3],
    pub grad_xi: [f64; 3],
}

/// `∇Λ(ζ)` and `∇²Λ(ζ)` of a signed branch.
fn branch_grad_hess(p: &SystemParams, idx: SignedIndex, z: &[f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let c = p.speed_of(idx);
    let b = p.mass(idx.component());
    let s = idx.sign();
    let c2 = c * c;
    let g = (c2 * dot(z, z) + b * b).sqrt();
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        grad[i] = s * c2 * z[i] / g;
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            hess[i][j] = s * c2 / g * (delta - c2 * z[i] * z[j] / (g * g));
        }
    }
    (s * g, grad, hess)
}

/// Value, `η`-gradient, `η`-Hessian and `ξ`-gradient of the phase.
pub fn phase_derivatives(p: &SystemParams, t: &PhaseTriple, xi: &[f64; 3], eta: &[f64; 3]) -> PhaseDerivatives {
    let d = sub(xi, eta);
    let (ls, gs, _) = branch_grad_hess(p, t.sigma, xi);
    let (lm, gm, hm) = branch_grad_hess(p, t.mu, &d);
    let (ln, gn, hn) = branch_grad_hess(p, t.nu, eta);
    let mut out = PhaseDerivatives {
        value: ls - lm - ln,
        grad_eta: [0.0; 3],
        hess_eta: [[0.0; 3]; 3],
        grad_xi: [0.0; 3],
    };
    for i in 0..3 {
        out.grad_eta[i] = gm[i] - gn[i];
        out.grad_xi[i] = gs[i] - gm[i];
        for j in 0..3 {
            out.hess_eta[i][j] = -hm[i][j] - hn[i][j];
        }
    }
    out
}

/// `∂_β^n Φ⁺(α, β)` for `n = 0..=order`, `order <= 4`.
pub fn parallel_phase(p: &SystemParams, t: &PhaseTriple, alpha: f64, beta: f64, order: usize) -> Result<Vec<f64>> {
    if order > 4 {
        return Err(Error::Domain(format!("derivative order {order} above 4")));
    }
    let d = TripleBranches::new(p, t).parallel_derivs(alpha, beta);
    Ok(d[..=order].to_vec())
}

/// Smallest value of `max_{n<=3} |∂_β^n Φ⁺|` over a grid on `[-half, half]^2`,
/// skipping points where `max(|α|, |β|, |α - β|) < exclude`.
pub fn derivative_floor(p: &SystemParams, t: &PhaseTriple, half: f64, samples: usize, exclude: f64) -> (f64, [f64; 2]) {
    let tb = TripleBranches::new(p, t);
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..samples {
        let a = -half + 2.0 * half * i as f64 / (samples - 1) as f64;
        for j in 0..samples {
            let b = -half + 2.0 * half * j as f64 / (samples - 1) as f64;
            if a.abs().max(b.abs()).max((a - b).abs()) < exclude {
                continue;
            }
            let d = tb.parallel_derivs(a, b);
            let m = d[..4].iter().map(|v| v.abs()).fold(0.0, f64::max);
            if m < best.0 {
                best = (m, [a, b]);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemBuilder;
    use proptest::prelude::*;

    fn sys(b: &[f64], c: &[f64]) -> SystemParams {
        SystemBuilder::new(b.to_vec(), c.to_vec()).build().unwrap()
    }

    #[test]
    fn reference_values() {
        let p = sys(&[1.0], &[1.0]);
        let z = [0.0; 3];
        let t = PhaseTriple::new(1, 1, 1, 1).unwrap();
        assert!((eval_phase(&p, &t, &z, &z) + 1.0).abs() < 1e-15);
        let t = PhaseTriple::new(1, -1, 1, 1).unwrap();
        assert!((eval_phase(&p, &t, &z, &z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mass_resonant_triple_vanishes_on_the_ray() {
        let p = sys(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let t = PhaseTriple::new(1, 2, 3, 3).unwrap();
        for xi in [[0.3, -1.2, 4.0], [10.0, 0.0, 0.0], [0.0; 3]] {
            let eta = [xi[0] / 2.0, xi[1] / 2.0, xi[2] / 2.0];
            assert!(eval_phase(&p, &t, &xi, &eta).abs() < 1e-14);
        }
    }

    #[test]
    fn parallel_reference() {
        let p = sys(&[1.0], &[1.0]);
        let t = PhaseTriple::new(1, 1, 1, 1).unwrap();
        let d = parallel_phase(&p, &t, 0.0, 0.0, 2).unwrap();
        assert!((d[0] + 1.0).abs() < 1e-15 && d[1].abs() < 1e-15 && (d[2] + 2.0).abs() < 1e-15);
        assert!(parallel_phase(&p, &t, 0.0, 0.0, 5).is_err());
    }

    #[test]
    fn branch_derivatives_match_differences() {
        let br = Branch { sign: -1.0, speed: 1.3, mass: 0.7 };
        for &x in &[-2.0, -0.1, 0.0, 0.4, 3.0] {
            let d = br.derivs(x);
            let h = 1e-3;
            for k in 0..4 {
                let num = (br.derivs(x + h)[k] - br.derivs(x - h)[k]) / (2.0 * h);
                assert!((num - d[k + 1]).abs() < 1e-5 * (1.0 + d[k + 1].abs()), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn derivative_floor_is_positive_away_from_origin() {
        let p = sys(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        for t in [[1, 2, 3], [1, 1, 1], [1, -2, 3], [-1, 2, 3]] {
            let t = PhaseTriple::new(t[0], t[1], t[2], 3).unwrap();
            let (m, _) = derivative_floor(&p, &t, 4.0, 201, 0.1);
            assert!(m > 1e-4, "{m}");
        }
    }

    fn vec3() -> impl Strategy<Value = [f64; 3]> {
        prop::array::uniform3(-6.0f64..6.0)
    }

    fn triple() -> impl Strategy<Value = [i32; 3]> {
        prop::array::uniform3(prop_oneof![Just(1), Just(2), Just(-1), Just(-2)])
    }

    proptest! {
        #[test]
        fn sign_symmetry(xi in vec3(), eta in vec3(), t in triple()) {
            let p = sys(&[1.0, 1.7], &[0.8, 1.4]);
            let t = PhaseTriple::new(t[0], t[1], t[2], 2).unwrap();
            let a = eval_phase(&p, &t, &xi, &eta);
            let b = eval_phase(&p, &t.negated(), &xi, &eta);
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn exchange_symmetry(xi in vec3(), eta in vec3(), t in triple()) {
            let p = sys(&[1.0, 1.7], &[0.8, 1.4]);
            let t = PhaseTriple::new(t[0], t[1], t[2], 2).unwrap();
            let a = eval_phase(&p, &t, &xi, &eta);
            let d = sub(&xi, &eta);
            let b = eval_phase(&p, &t.swapped(), &xi, &d);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn analytic_derivatives_match_differences(xi in vec3(), eta in vec3(), t in triple()) {
            let p = sys(&[1.0, 1.7], &[0.8, 1.4]);
            let t = PhaseTriple::new(t[0], t[1], t[2], 2).unwrap();
            let d = phase_derivatives(&p, &t, &xi, &eta);
            let h = 1e-5;
            for i in 0..3 {
                let mut ep = eta; ep[i] += h;
                let mut em = eta; em[i] -= h;
                let num = (eval_phase(&p, &t, &xi, &ep) - eval_phase(&p, &t, &xi, &em)) / (2.0 * h);
                prop_assert!((num - d.grad_eta[i]).abs() <= 1e-6 * (1.0 + d.grad_eta[i].abs()));
                let gp = phase_derivatives(&p, &t, &xi, &ep).grad_eta;
                let gm = phase_derivatives(&p, &t, &xi, &em).grad_eta;
                for j in 0..3 {
                    let num = (gp[j] - gm[j]) / (2.0 * h);
                    prop_assert!((num - d.hess_eta[i][j]).abs() <= 1e-6 * (1.0 + d.hess_eta[i][j].abs()));
                }
                let mut xp = xi; xp[i] += h;
                let mut xm = xi; xm[i] -= h;
                let num = (eval_phase(&p, &t, &xp, &eta) - eval_phase(&p, &t, &xm, &eta)) / (2.0 * h);
                prop_assert!((num - d.grad_xi[i]).abs() <= 1e-6 * (1.0 + d.grad_xi[i].abs()));
            }
        }
    }
}
