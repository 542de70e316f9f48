//! Bound calculator for repeated integration by parts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbpParameters {
    /// Large frequency `K >= 1`.
    pub k: f64,
    /// Lower bounds `ε_1..ε_n` for the phase derivatives; `n = eps.len()`.
    pub eps: Vec<f64>,
    /// Amplitude derivative scale `λ >= 1`.
    pub lambda: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbpBound {
    pub m: f64,
    /// `exp(-γ M^γ)`.
    pub bound: f64,
}

impl IbpParameters {
    pub fn new(k: f64, eps: Vec<f64>, lambda: f64) -> Self {
        IbpParameters {
            k,
            eps,
            lambda,
            gamma: default_gamma(),
        }
    }

    /// The choice `ε_j = ε^{(n-j+1)/n}`.
    pub fn graded(k: f64, n: usize, eps: f64, lambda: f64) -> Self {
        let nf = n as f64;
        let e = (1..=n).map(|j| eps.powf((nf - j as f64 + 1.0) / nf)).collect();
        IbpParameters::new(k, e, lambda)
    }

    fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0) {
            return Err(Error::Domain(format!("K = {} must be at least 1", self.k)));
        }
        if !(self.lambda >= 1.0) {
            return Err(Error::Domain(format!("λ = {} must be at least 1", self.lambda)));
        }
        if self.eps.is_empty() {
            return Err(Error::Domain("need at least one derivative bound".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Domain(format!("derivative bound {e} must be positive")));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Domain(format!("γ = {} must be positive", self.gamma)));
        }
        Ok(())
    }
}

pub fn ibp_bound(p: &IbpParameters) -> Result<IbpBound> {
    p.validate()?;
    let (k, e) = (p.k, &p.eps);
    let e1 = e[0];
    let n = e.len();
    let mut m = k * e1 / p.lambda;
    m = m.min(k * e1 * e[n - 1]);
    for j in 0..n - 1 {
        m = m.min(k * e1 * e[j] / e[j + 1]);
    }
    Ok(IbpBound {
        m,
        bound: (-p.gamma * m.powf(p.gamma)).exp(),
    })
}
