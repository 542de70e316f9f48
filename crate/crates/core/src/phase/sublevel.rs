//! Measure of `{β : |Φ⁺(α, β)| <= ε}` on a window.
//!
//! The window is cut at the critical points of `β ↦ Φ⁺(α, β)`; on each
//! monotone piece the sublevel set is one interval whose ends are found by
//! bisection, so the result is exact up to the bisection tolerance.

use serde::{Deserialize, Serialize};

use super::TripleBranches;
use crate::error::{Error, Result};
use crate::params::{PhaseTriple, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelOptions {
    /// Grid density used to bracket critical points.
    pub samples_per_unit: f64,
    pub tol: f64,
}

impl Default for SublevelOptions {
    fn default() -> Self {
        SublevelOptions {
            samples_per_unit: 4096.0,
            tol: 1e-15,
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Critical points of `β ↦ Φ⁺(α, β)` inside `(lo, hi)`.
pub fn critical_points(tb: &TripleBranches, alpha: f64, lo: f64, hi: f64, opts: &SublevelOptions) -> Vec<f64> {
    let n = (((hi - lo) * opts.samples_per_unit).ceil() as usize).max(16);
    let d = |b: f64| tb.parallel_dbeta(alpha, b);
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = d(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = d(x);
        if prev == 0.0 && i > 1 {
            out.push(prev_x);
        } else if prev * v < 0.0 {
            out.push(bisect(d, prev_x, x, opts.tol));
        }
        prev_x = x;
        prev = v;
    }
    out
}

pub fn sublevel_measure(
    p: &SystemParams,
    t: &PhaseTriple,
    alpha: f64,
    eps: f64,
    window: (f64, f64),
    opts: &SublevelOptions,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Validation(format!("ε = {eps} must be positive")));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Validation(format!("empty β window [{lo}, {hi}]")));
    }
    let tb = TripleBranches::new(p, t);
    let phi = |b: f64| tb.parallel(alpha, b);
    let mut cuts = vec![lo];
    cuts.extend(critical_points(&tb, alpha, lo, hi, opts));
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (fa, fb) = (phi(a), phi(b));
        let s = if fb >= fa { 1.0 } else { -1.0 };
        // on the piece, s·Φ⁺ increases from s·fa to s·fb
        let inverse = |y: f64| -> f64 {
            if y <= s * fa {
                a
            } else if y >= s * fb {
                b
            } else {
                bisect(|x| s * phi(x) - y, a, b, opts.tol)
            }
        };
        total += inverse(eps) - inverse(-eps);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemBuilder;

    fn setup(b: &[f64], c: &[f64], t: [i32; 3]) -> (SystemParams, PhaseTriple) {
        let p = SystemBuilder::new(b.to_vec(), c.to_vec()).build().unwrap();
        let t = PhaseTriple::new(t[0], t[1], t[2], b.len()).unwrap();
        (p, t)
    }

    #[test]
    fn bounded_away_phase_has_empty_sublevel_set() {
        let (p, t) = setup(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 1, 1]);
        let m = sublevel_measure(&p, &t, 0.0, 0.3, (-3.0, 3.0), &SublevelOptions::default()).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn closed_form_inversion() {
        let (p, t) = setup(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 2, 3]);
        for eps in [1e-2, 1e-4, 0.5] {
            let m = sublevel_measure(&p, &t, 0.0, eps, (-3.0, 3.0), &SublevelOptions::default()).unwrap();
            let exact = 2.0 * ((1.0 + eps / 2.0_f64).powi(2) - 1.0).sqrt();
            assert!((m - exact).abs() < 1e-12, "{eps}: {m} vs {exact}");
        }
        let m = sublevel_measure(&p, &t, 0.0, 1e-2, (-3.0, 3.0), &SublevelOptions::default()).unwrap();
        assert!((m - 0.2003).abs() < 1e-4);
    }

    #[test]
    fn window_clips_the_set() {
        let (p, t) = setup(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 2, 3]);
        let m = sublevel_measure(&p, &t, 0.0, 0.5, (0.0, 0.1), &SublevelOptions::default()).unwrap();
        assert!((m - 0.1).abs() < 1e-14);
        assert!(sublevel_measure(&p, &t, 0.0, 0.0, (0.0, 1.0), &SublevelOptions::default()).is_err());
    }
}
