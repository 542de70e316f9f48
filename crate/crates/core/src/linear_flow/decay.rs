//! Sup-norm decay of the free flow measured on the periodic grid.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::propagate;
use crate::dyadic::{localize, Localization, SpectralField, SphericalAnalysis};
use crate::error::{Error, Result};
use crate::fit::power_fit;
use crate::params::{SignedIndex, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Exponent `p` in `‖u(t)‖_∞ ≈ C t^p` over the window.
    pub slope: f64,
    /// 95% half-width of the slope from the least-squares residuals.
    pub slope_ci: f64,
    pub window: (f64, f64),
}

impl DecayFit {
    /// Fits the samples whose time lies in `window`.
    pub fn from_samples(times: Vec<f64>, sup_norms: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        if let Some(v) = sup_norms.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Numerical(format!("sup-norm sample {v} is not positive")));
        }
        let (t, s): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(&sup_norms)
            .filter(|(t, _)| **t >= window.0 && **t <= window.1)
            .map(|(a, b)| (*a, *b))
            .unzip();
        if t.is_empty() {
            return Err(Error::Validation(format!("no sample times inside the window {window:?}")));
        }
        let (slope, slope_ci) = if t.iter().all(|v| *v == t[0]) {
            // a single repeated time: nothing decays
            (0.0, 0.0)
        } else {
            let fit = power_fit(&t, &s)
                .ok_or_else(|| Error::Numerical("log-log fit failed".into()))?;
            let ci = if fit.points > 2 {
                let q = StudentsT::new(0.0, 1.0, (fit.points - 2) as f64)
                    .map_err(|e| Error::Numerical(e.to_string()))?
                    .inverse_cdf(0.975);
                q * fit.slope_stderr
            } else {
                f64::INFINITY
            };
            (fit.slope, ci)
        };
        Ok(DecayFit {
            times,
            sup_norms,
            slope,
            slope_ci,
            window,
        })
    }
}

/// Optional pre-localization `S_l Q_jk` of the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayLocalization {
    pub j: i32,
    pub k: i32,
    pub l: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    /// Subdivisions per cell for the local sup-norm refinement.
    pub refine: usize,
    /// Width of the outer layer, as a fraction of the box, watched for
    /// wrap-around.
    pub wrap_margin: f64,
    /// Largest tolerated fraction of the squared mass in that layer.
    pub wrap_threshold: f64,
    /// Fit window; all samples when absent.
    pub window: Option<(f64, f64)>,
    /// Degree cap for `S_l`.
    pub degree_cap: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            refine: 4,
            wrap_margin: 0.05,
            wrap_threshold: 1e-6,
            window: None,
            degree_cap: 24,
        }
    }
}

pub fn decay_fit(
    p: &SystemParams,
    sigma: SignedIndex,
    initial: &SpectralField,
    times: &[f64],
    loc: Option<DecayLocalization>,
    o: &DecayOptions,
) -> Result<DecayFit> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Validation("sample times must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("sample times must be nondecreasing".into()));
    }
    let data = match loc {
        None => initial.clone(),
        Some(DecayLocalization { j, k, l }) => {
            let q = localize(initial, Localization::Star { j, k })?.field;
            match l {
                None => q,
                Some(l) => SphericalAnalysis::new(initial.grid(), o.degree_cap).project(&q, l)?,
            }
        }
    };
    let mut sups = Vec::with_capacity(times.len());
    for &t in times {
        let u = propagate(&data, p, sigma, t);
        let edge = u.boundary_mass_fraction(o.wrap_margin);
        if edge > o.wrap_threshold {
            return Err(Error::WrapAround(format!(
                "{edge:.2e} of the mass reaches the box boundary at t = {t}; enlarge the box to at least {:.1}",
                8.0 * p.max_speed() * times[times.len() - 1]
            )));
        }
        sups.push(u.sup_norm(o.refine));
    }
    let window = o.window.unwrap_or((times[0], times[times.len() - 1]));
    DecayFit::from_samples(times.to_vec(), sups, window)
}
