//! Factorization of `∂_β Φ⁺(α, ·)` along the parallel line.
//!
//! Squaring `∂_β Φ⁺ = 0` clears the radicals and leaves a quartic in `β`
//! whose roots are the critical points of `Φ⁺` together with those of the
//! companion function obtained by flipping the sign of the `ν` branch. Two
//! real roots always exist, one between `0` and `α` and one outside; one of
//! them is the critical point `R1`. Dividing both out leaves a quadratic
//! written as `(β - R2)^2 - Q`.

use serde::{Deserialize, Serialize};

use super::poly;
use super::TripleBranches;
use crate::error::{Error, Result};
use crate::params::{PhaseTriple, SystemParams};

const SPEED_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Factorization {
    /// Equal speeds in the two factors: the unique critical point is `β = ρα`.
    Reduced { rho: f64 },
    Quartic(QuarticFactorization),
}

impl Factorization {
    pub fn as_quartic(&self) -> Option<&QuarticFactorization> {
        match self {
            Factorization::Quartic(q) => Some(q),
            Factorization::Reduced { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuarticFactorization {
    branches: TripleBranches,
    pub alpha_range: (f64, f64),
    /// Simple zeros of `Q(α)` inside the range, ascending.
    pub q_zeros: Vec<f64>,
}

/// The factorization at a fixed `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorAt {
    pub alpha: f64,
    pub r1: f64,
    /// The guaranteed root that belongs to the companion function.
    pub r_companion: f64,
    pub r2: f64,
    pub q: f64,
    /// Sign in `∂_β Φ⁺ = sign · P · (β - R1)((β - R2)^2 - Q)`.
    pub sign: f64,
    lead: f64,
}

impl FactorAt {
    pub fn r3(&self) -> f64 {
        self.r2 + self.q.abs().sqrt()
    }

    pub fn r4(&self) -> f64 {
        self.r2 - self.q.abs().sqrt()
    }

    pub fn quadratic(&self, beta: f64) -> f64 {
        (beta - self.r2).powi(2) - self.q
    }
}

fn companion(tb: &TripleBranches, alpha: f64, beta: f64) -> f64 {
    tb.mu.d1(alpha - beta) + tb.nu.d1(beta)
}

fn companion_deriv(tb: &TripleBranches, alpha: f64, beta: f64) -> f64 {
    -tb.mu.derivs(alpha - beta)[2] + tb.nu.derivs(beta)[2]
}

fn dbeta_deriv(tb: &TripleBranches, alpha: f64, beta: f64) -> f64 {
    -tb.mu.derivs(alpha - beta)[2] - tb.nu.derivs(beta)[2]
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Quartic `c_μ^4 (β-α)^2 (c_ν^2 β^2 + b_ν^2) - c_ν^4 β^2 (c_μ^2 (β-α)^2 + b_μ^2)`.
fn quartic(tb: &TripleBranches, alpha: f64) -> Vec<f64> {
    let (cm, bm) = (tb.mu.speed, tb.mu.mass);
    let (cn, bn) = (tb.nu.speed, tb.nu.mass);
    let shifted = poly::mul(&[-alpha, 1.0], &[-alpha, 1.0]);
    let t1 = poly::scale(&poly::mul(&shifted, &[sq(bn), 0.0, sq(cn)]), sq(sq(cm)));
    let inner = poly::add(&poly::scale(&shifted, sq(cm)), &[sq(bm)]);
    let t2 = poly::scale(&poly::mul(&[0.0, 0.0, 1.0], &inner), sq(sq(cn)));
    poly::add(&t1, &poly::scale(&t2, -1.0))
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let d = poly::eval_deriv(c, x);
        if d == 0.0 {
            break;
        }
        let step = poly::eval(c, x) / d;
        x -= step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

impl QuarticFactorization {
    /// Pointwise factorization without scanning for zeros of `Q`.
    pub fn new(p: &SystemParams, t: &PhaseTriple) -> Result<Self> {
        let tb = TripleBranches::new(p, t);
        if (tb.mu.speed - tb.nu.speed).abs() <= SPEED_TOL {
            return Err(Error::Precondition("the quartic form needs c_μ != c_ν".into()));
        }
        Ok(QuarticFactorization {
            branches: tb,
            alpha_range: (f64::NAN, f64::NAN),
            q_zeros: vec![],
        })
    }

    pub fn branches(&self) -> &TripleBranches {
        &self.branches
    }

    pub fn at(&self, alpha: f64) -> Result<FactorAt> {
        factor_at(&self.branches, alpha)
    }

    pub fn q(&self, alpha: f64) -> Result<f64> {
        Ok(self.at(alpha)?.q)
    }

    /// `P(α, β) > 0`, evaluated from the quartic identity rather than by
    /// dividing `∂_β Φ⁺` by the other factors.
    pub fn p(&self, f: &FactorAt, beta: f64) -> f64 {
        p_value(&self.branches, f, beta)
    }

    /// `sign · P · (β - R1)((β - R2)^2 - Q)`.
    pub fn reconstruct(&self, f: &FactorAt, beta: f64) -> f64 {
        f.sign * self.p(f, beta) * (beta - f.r1) * f.quadratic(beta)
    }

    pub fn dbeta(&self, alpha: f64, beta: f64) -> f64 {
        self.branches.parallel_dbeta(alpha, beta)
    }
}

fn p_value(tb: &TripleBranches, f: &FactorAt, beta: f64) -> f64 {
    let alpha = f.alpha;
    let gm2 = sq(tb.mu.speed * (alpha - beta)) + sq(tb.mu.mass);
    let gn2 = sq(tb.nu.speed * beta) + sq(tb.nu.mass);
    let d = beta - f.r_companion;
    let ratio = if d.abs() < 1e-7 * (1.0 + f.r_companion.abs()) {
        let g1 = companion_deriv(tb, alpha, f.r_companion);
        let g2 = {
            let h = 1e-4 * (1.0 + f.r_companion.abs());
            (companion_deriv(tb, alpha, f.r_companion + h) - companion_deriv(tb, alpha, f.r_companion - h)) / (2.0 * h)
        };
        // (β - r)/G(β) with G(β) ≈ G'(r) d + G''(r) d^2 / 2
        1.0 / (g1 + 0.5 * g2 * d)
    } else {
        d / companion(tb, alpha, beta)
    };
    (f.lead * ratio / (gm2 * gn2)).abs()
}

fn factor_at(tb: &TripleBranches, alpha: f64) -> Result<FactorAt> {
    if alpha == 0.0 {
        return Err(Error::Domain("the factorization needs α != 0".into()));
    }
    let c = quartic(tb, alpha);
    let lead = c[4];
    let roots = poly::roots(&c)?;
    let real: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.norm()))
        .map(|z| polish(&c, z.re))
        .collect();
    let (lo, hi) = if alpha > 0.0 { (0.0, alpha) } else { (alpha, 0.0) };
    let inner: Vec<f64> = real.iter().cloned().filter(|b| *b > lo && *b < hi).collect();
    let beyond_alpha = tb.mu.speed > tb.nu.speed;
    let outer: Vec<f64> = real
        .iter()
        .cloned()
        .filter(|&b| match (alpha > 0.0, beyond_alpha) {
            (true, true) => b > alpha,
            (true, false) => b < 0.0,
            (false, true) => b < alpha,
            (false, false) => b > 0.0,
        })
        .collect();
    if inner.len() != 1 || outer.len() != 1 {
        return Err(Error::DegenerateFactorization(format!(
            "at α = {alpha}: expected one root on each side, found {} between 0 and α and {} outside",
            inner.len(),
            outer.len()
        )));
    }
    let (a, b) = (inner[0], outer[0]);
    let fa = tb.parallel_dbeta(alpha, a).abs();
    let fb = tb.parallel_dbeta(alpha, b).abs();
    let ga = companion(tb, alpha, a).abs();
    let gb = companion(tb, alpha, b).abs();
    let (mut r1, rc) = if fa <= ga && gb <= fb {
        (a, b)
    } else if fb <= gb && ga <= fa {
        (b, a)
    } else {
        return Err(Error::DegenerateFactorization(format!(
            "at α = {alpha}: cannot tell which guaranteed root is critical"
        )));
    };
    for _ in 0..6 {
        let d = dbeta_deriv(tb, alpha, r1);
        if d == 0.0 {
            break;
        }
        r1 -= tb.parallel_dbeta(alpha, r1) / d;
    }
    let (q1, _) = poly::deflate(&c, a);
    let (quad, _) = poly::deflate(&q1, b);
    let r2 = -quad[1] / (2.0 * quad[2]);
    let q = r2 * r2 - quad[0] / quad[2];
    let mut f = FactorAt {
        alpha,
        r1,
        r_companion: rc,
        r2,
        q,
        sign: 1.0,
        lead,
    };
    // fix the sign at a probe point away from the roots
    let probe = r1 + 1.0 + (r1 - r2).abs();
    let val = tb.parallel_dbeta(alpha, probe);
    let rec = p_value(tb, &f, probe) * (probe - r1) * f.quadratic(probe);
    f.sign = if val * rec >= 0.0 { 1.0 } else { -1.0 };
    Ok(f)
}

/// Builds the factorization over `α` in `alpha_range` (which must not
/// contain 0), locating the zeros of `Q` on `samples` points.
pub fn factor_dbeta(p: &SystemParams, t: &PhaseTriple, alpha_range: (f64, f64), samples: usize) -> Result<Factorization> {
    let tb = TripleBranches::new(p, t);
    if (tb.mu.speed - tb.nu.speed).abs() <= SPEED_TOL {
        let bm = p.signed_mass(t.mu);
        let bn = p.signed_mass(t.nu);
        if (bm + bn).abs() <= SPEED_TOL {
            return Err(Error::DegenerateFactorization(
                "equal speeds and opposite masses: no critical point for α != 0".into(),
            ));
        }
        return Ok(Factorization::Reduced { rho: bn / (bm + bn) });
    }
    let (a, b) = alpha_range;
    if !(a < b) || (a <= 0.0 && b >= 0.0) || samples < 2 {
        return Err(Error::Precondition(format!(
            "α range [{a}, {b}] must be increasing, exclude 0 and have at least 2 samples"
        )));
    }
    let fac = QuarticFactorization {
        branches: tb,
        alpha_range,
        q_zeros: vec![],
    };
    let alphas: Vec<f64> = (0..samples)
        .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
        .collect();
    let mut qs = Vec::with_capacity(samples);
    for &al in &alphas {
        let f = fac.at(al)?;
        if f.q > 0.0 {
            let ok = [f.r3(), f.r4()]
                .iter()
                .all(|r| tb.parallel_dbeta(al, *r).abs() <= 1e-8 * (1.0 + companion(&tb, al, *r).abs()));
            if !ok {
                return Err(Error::DegenerateFactorization(format!(
                    "at α = {al}: the real roots of the quadratic factor are not critical points"
                )));
            }
        }
        qs.push(f.q);
    }
    let mut zeros = Vec::new();
    for i in 0..samples - 1 {
        if qs[i] == 0.0 {
            zeros.push(alphas[i]);
            continue;
        }
        if qs[i] * qs[i + 1] < 0.0 {
            let (mut lo, mut hi) = (alphas[i], alphas[i + 1]);
            let mut qlo = qs[i];
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let qm = fac.q(mid)?;
                if qm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if qm * qlo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    qlo = qm;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
    }
    Ok(Factorization::Quartic(QuarticFactorization {
        q_zeros: zeros,
        ..fac
    }))
}

/// Smallest `|R1 - R2|` over `samples` points of `[α0 - radius, α0 + radius]`.
pub fn min_root_gap(f: &QuarticFactorization, alpha0: f64, radius: f64, samples: usize) -> Result<f64> {
    let n = samples.max(2);
    let mut gap = f64::INFINITY;
    for i in 0..n {
        let a = alpha0 - radius + 2.0 * radius * i as f64 / (n - 1) as f64;
        let at = f.at(a)?;
        gap = gap.min((at.r1 - at.r2).abs());
    }
    Ok(gap)
}

/// `dQ/dα` by central differences.
pub fn q_slope(f: &QuarticFactorization, alpha: f64) -> Result<f64> {
    let h = 1e-6 * (1.0 + alpha.abs());
    Ok((f.q(alpha + h)? - f.q(alpha - h)?) / (2.0 * h))
}
