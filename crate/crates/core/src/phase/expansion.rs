//! Behaviour of `Φ⁺` along the branch `R3 = R2 + sqrt|Q|` near a zero of `Q`.

use serde::{Deserialize, Serialize};

use super::factor::QuarticFactorization;
use crate::error::{Error, Result};
use crate::fit::power_fit;
use crate::params::{PhaseTriple, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOptions {
    /// Offsets `|α - α0|` are sampled log-uniformly in `[h_min, h_max]`.
    pub h_min: f64,
    pub h_max: f64,
    pub samples: usize,
    /// `|Q(α0)|` and `|Φ⁺(α0, R2(α0))|` must not exceed this.
    pub zero_tol: f64,
    /// `λ` below this is treated as zero.
    pub lambda_tol: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        ExpansionOptions {
            h_min: 1e-4,
            h_max: 1e-2,
            samples: 21,
            zero_tol: 1e-8,
            lambda_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub alpha0: f64,
    pub beta0: f64,
    /// `∂_α Φ⁺(α0, R2(α0))`.
    pub lambda: f64,
    /// Prefactors of `|α - α0|^p` on each side.
    pub lambda_prime_left: f64,
    pub lambda_prime_right: f64,
    pub exponent_left: f64,
    pub exponent_right: f64,
    /// Mean of the one-sided exponents; 1.5 is expected.
    pub fit_exponent: f64,
    /// One-sided growth exponents of `|d/dα Φ⁺(α, R3(α))|` when `λ = 0`;
    /// 0.5 is expected.
    pub derivative_exponents: Option<[f64; 2]>,
}

fn offsets(o: &ExpansionOptions) -> Vec<f64> {
    let n = o.samples.max(2);
    let (a, b) = (o.h_min.ln(), o.h_max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn expansion_at_q_zero(
    p: &SystemParams,
    t: &PhaseTriple,
    alpha0: f64,
    opts: &ExpansionOptions,
) -> Result<ExpansionFit> {
    if !(opts.h_min > 0.0 && opts.h_min < opts.h_max) {
        return Err(Error::Validation("need 0 < h_min < h_max".into()));
    }
    let fac = QuarticFactorization::new(p, t)?;
    let tb = *fac.branches();
    let f0 = fac.at(alpha0)?;
    let phi0 = tb.parallel(alpha0, f0.r2);
    if f0.q.abs() > opts.zero_tol || phi0.abs() > opts.zero_tol {
        return Err(Error::Precondition(format!(
            "α0 = {alpha0} is not a resonant zero of Q: Q = {:.3e}, Φ⁺(α0, R2) = {:.3e}",
            f0.q, phi0
        )));
    }
    let lambda = tb.parallel_dalpha(alpha0, f0.r2);
    let along = |a: f64| -> Result<f64> {
        let f = fac.at(a)?;
        Ok(tb.parallel(a, f.r3()))
    };
    let hs = offsets(opts);
    let mut exps = [0.0; 2];
    let mut prefs = [0.0; 2];
    let mut dexps = [0.0; 2];
    let flat = lambda.abs() <= opts.lambda_tol;
    for (slot, side) in [-1.0f64, 1.0].into_iter().enumerate() {
        let mut ys = Vec::with_capacity(hs.len());
        let mut ds = Vec::with_capacity(hs.len());
        for &h in &hs {
            let a = alpha0 + side * h;
            ys.push((along(a)? - lambda * side * h).abs());
            if flat {
                let dh = 1e-3 * h;
                ds.push(((along(a + dh)? - along(a - dh)?) / (2.0 * dh)).abs());
            }
        }
        let fit = power_fit(&hs, &ys)
            .ok_or_else(|| Error::Numerical("remainder vanished on the fit window".into()))?;
        exps[slot] = fit.slope;
        prefs[slot] = fit.intercept.exp();
        if flat {
            let fit = power_fit(&hs, &ds)
                .ok_or_else(|| Error::Numerical("derivative vanished on the fit window".into()))?;
            dexps[slot] = fit.slope;
        }
    }
    Ok(ExpansionFit {
        alpha0,
        beta0: f0.r2,
        lambda,
        lambda_prime_left: prefs[0],
        lambda_prime_right: prefs[1],
        exponent_left: exps[0],
        exponent_right: exps[1],
        fit_exponent: 0.5 * (exps[0] + exps[1]),
        derivative_exponents: flat.then_some(dexps),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::params::SystemBuilder;
    use crate::phase::factor::{factor_dbeta, Factorization};

    /// Two fixed factors with a zero of `Q` near 2.604, and a first factor
    /// whose mass (and speed, for `flat`) is tuned so that `Φ⁺` vanishes at
    /// the double root, with `λ = 0` in the flat case.
    pub(crate) fn tuned(flat: bool) -> (SystemParams, PhaseTriple, f64) {
        let probe = SystemBuilder::new(vec![1.0, 2.0, 0.5], vec![1.0, 1.05, 1.0]).build().unwrap();
        let t = PhaseTriple::new(1, 2, -3, 3).unwrap();
        let Factorization::Quartic(q) = factor_dbeta(&probe, &t, (2.0, 3.0), 101).unwrap() else {
            panic!()
        };
        let a0 = q.q_zeros[0];
        let b0 = q.at(a0).unwrap().r2;
        let g = |c: f64, b: f64, x: f64| (c * c * x * x + b * b).sqrt();
        let total = g(1.05, 2.0, a0 - b0) - g(1.0, 0.5, b0);
        let slope = 1.05 * 1.05 * (a0 - b0) / g(1.05, 2.0, a0 - b0);
        let (c, b) = if flat {
            ((slope * total / a0).sqrt(), (total * total - slope * total * a0).sqrt())
        } else {
            (1.0, (total * total - a0 * a0).sqrt())
        };
        let p = SystemBuilder::new(vec![b, 2.0, 0.5], vec![c, 1.05, 1.0]).build().unwrap();
        (p, t, a0)
    }

    #[test]
    fn three_halves_law() {
        let (p, t, a0) = tuned(false);
        let fit = expansion_at_q_zero(&p, &t, a0, &ExpansionOptions::default()).unwrap();
        assert!(fit.lambda.abs() > 0.1, "{}", fit.lambda);
        assert!((fit.exponent_left - 1.5).abs() < 0.05, "{fit:?}");
        assert!((fit.exponent_right - 1.5).abs() < 0.05, "{fit:?}");
        assert!(fit.lambda_prime_left > 0.0 && fit.lambda_prime_right > 0.0);
        assert!(fit.derivative_exponents.is_none());
    }

    #[test]
    fn square_root_law_when_lambda_vanishes() {
        let (p, t, a0) = tuned(true);
        let fit = expansion_at_q_zero(&p, &t, a0, &ExpansionOptions::default()).unwrap();
        assert!(fit.lambda.abs() < 1e-8);
        let [l, r] = fit.derivative_exponents.unwrap();
        assert!((l - 0.5).abs() < 0.05 && (r - 0.5).abs() < 0.05, "{l} {r}");
    }

    #[test]
    fn rejects_a_point_that_is_not_a_zero() {
        let (p, t, a0) = tuned(false);
        let r = expansion_at_q_zero(&p, &t, a0 + 0.1, &ExpansionOptions::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
