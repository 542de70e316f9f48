//! Gauss-Kronrod quadrature for oscillatory integrals `∫ e^{iKΦ} h`.
//!
//! The domain is first cut so that `KΦ` moves by less than `π/4` across a
//! cell, then each cell is integrated with a 15-point Kronrod rule whose
//! embedded 7-point Gauss rule gives the error estimate. In one dimension
//! the worst cells are bisected until the requested tolerance is met.

use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes on `[-1, 1]` with Kronrod and Gauss weights (Gauss weight 0 off the
/// Gauss subset).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut n = 0;
    for i in 0..8 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[n] = (-XGK[i], WGK[i], wg);
        n += 1;
        if i < 7 {
            out[n] = (XGK[i], WGK[i], wg);
            n += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on integrand evaluations.
    pub max_evals: usize,
    /// Samples per axis used to estimate the phase gradient.
    pub gradient_samples: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_evals: 50_000_000,
            gradient_samples: 2001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Kronrod value and `|K - G|` on `[a, b]`.
pub fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for (x, wk, wg) in rule() {
        let v = f(c + h * x);
        k += v * wk;
        g += v * wg;
    }
    (k * h, ((k - g) * h).norm())
}

struct Cell {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Adaptive integral of a complex function over `[a, b]` starting from
/// `initial` equal cells.
pub fn integrate_1d(f: impl Fn(f64) -> Complex64, a: f64, b: f64, initial: usize, o: &QuadOptions) -> QuadResult {
    let n = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * n);
    let mut evals = 0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for i in 0..n {
        let lo = a + (b - a) * i as f64 / n as f64;
        let hi = a + (b - a) * (i + 1) as f64 / n as f64;
        let (value, e) = gk15(&f, lo, hi);
        evals += 15;
        total += value;
        err += e;
        heap.push(Cell { a: lo, b: hi, value, err: e });
    }
    while err > o.abs_tol.max(o.rel_tol * total.norm()) && evals + 30 <= o.max_evals {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        total -= worst.value;
        err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, e) = gk15(&f, lo, hi);
            total += value;
            err += e;
            heap.push(Cell { a: lo, b: hi, value, err: e });
        }
        evals += 30;
    }
    // resum to shed the drift of the running totals
    QuadResult {
        value: heap.iter().map(|c| c.value).sum(),
        error_estimate: heap.iter().map(|c| c.err).sum(),
        evaluations: evals,
    }
}

fn max_slope(phase: &impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let n = samples.max(3);
    let h = (b - a) / (n - 1) as f64;
    let mut prev = phase(a);
    let mut s: f64 = 0.0;
    for i in 1..n {
        let v = phase(a + h * i as f64);
        s = s.max(((v - prev) / h).abs());
        prev = v;
    }
    s
}

/// `∫_a^b e^{iKΦ(x)} h(x) dx` for an amplitude vanishing at both ends.
pub fn osc_integral_1d(
    phase: impl Fn(f64) -> f64,
    amplitude: impl Fn(f64) -> f64,
    k: f64,
    (a, b): (f64, f64),
    o: &QuadOptions,
) -> Result<QuadResult> {
    if !(a < b) {
        return Err(Error::Validation(format!("empty interval [{a}, {b}]")));
    }
    let scale = (0..=64)
        .map(|i| amplitude(a + (b - a) * i as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    if amplitude(a).abs() > 1e-12 * scale || amplitude(b).abs() > 1e-12 * scale {
        return Err(Error::Precondition("the amplitude must vanish at the interval ends".into()));
    }
    let slope = max_slope(&phase, a, b, o.gradient_samples);
    let cells = (k.abs() * slope * (b - a) / FRAC_PI_4).ceil().max(1.0);
    let needed = cells * 15.0;
    if needed > o.max_evals as f64 {
        return Err(Error::Cost {
            message: format!("K = {k} needs about {needed:.3e} evaluations"),
            suggested_max_k: k * o.max_evals as f64 / needed,
        });
    }
    Ok(integrate_1d(
        |x| Complex64::from_polar(amplitude(x), k * phase(x)),
        a,
        b,
        cells as usize,
        o,
    ))
}

/// `∫ e^{iKΦ(x)} h(x) dx` over a box in three dimensions with a fixed
/// tensor-product rule.
pub fn osc_integral_3d(
    phase: impl Fn([f64; 3]) -> f64,
    amplitude: impl Fn([f64; 3]) -> f64,
    k: f64,
    bounds: [(f64, f64); 3],
    o: &QuadOptions,
) -> Result<QuadResult> {
    if bounds.iter().any(|(a, b)| !(a < b)) {
        return Err(Error::Validation("empty box".into()));
    }
    // per-axis slope estimate along lines through a coarse set of points
    let probe = 9;
    let mut cells = [1usize; 3];
    for ax in 0..3 {
        let (a, b) = bounds[ax];
        let mut slope: f64 = 0.0;
        for i in 0..probe {
            for j in 0..probe {
                let others: Vec<usize> = (0..3).filter(|d| *d != ax).collect();
                let mut x = [0.0; 3];
                let frac = |t: usize| (t as f64 + 0.5) / probe as f64;
                x[others[0]] = bounds[others[0]].0 + (bounds[others[0]].1 - bounds[others[0]].0) * frac(i);
                x[others[1]] = bounds[others[1]].0 + (bounds[others[1]].1 - bounds[others[1]].0) * frac(j);
                let line = |t: f64| {
                    let mut y = x;
                    y[ax] = t;
                    phase(y)
                };
                slope = slope.max(max_slope(&line, a, b, o.gradient_samples.min(257)));
            }
        }
        cells[ax] = (k.abs() * slope * (b - a) / FRAC_PI_4).ceil().max(1.0) as usize;
    }
    let needed = cells.iter().map(|c| *c as f64).product::<f64>() * 3375.0;
    if needed > o.max_evals as f64 {
        return Err(Error::Cost {
            message: format!("K = {k} needs about {needed:.3e} evaluations"),
            suggested_max_k: k * (o.max_evals as f64 / needed).cbrt(),
        });
    }
    let r = rule();
    let mut kron = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    let h: Vec<f64> = (0..3).map(|d| (bounds[d].1 - bounds[d].0) / cells[d] as f64).collect();
    for c0 in 0..cells[0] {
        for c1 in 0..cells[1] {
            for c2 in 0..cells[2] {
                let lo = [
                    bounds[0].0 + h[0] * c0 as f64,
                    bounds[1].0 + h[1] * c1 as f64,
                    bounds[2].0 + h[2] * c2 as f64,
                ];
                let jac = h[0] * h[1] * h[2] / 8.0;
                for (x0, k0, g0) in r {
                    for (x1, k1, g1) in r {
                        for (x2, k2, g2) in r {
                            let x = [
                                lo[0] + 0.5 * h[0] * (x0 + 1.0),
                                lo[1] + 0.5 * h[1] * (x1 + 1.0),
                                lo[2] + 0.5 * h[2] * (x2 + 1.0),
                            ];
                            let v = Complex64::from_polar(amplitude(x), k * phase(x)) * jac;
                            kron += v * (k0 * k1 * k2);
                            gauss += v * (g0 * g1 * g2);
                        }
                    }
                }
            }
        }
    }
    Ok(QuadResult {
        value: kron,
        error_estimate: (kron - gauss).norm(),
        evaluations: needed as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Smooth bump supported in `(-r, r)` with value 1 at 0.
    fn smooth(r: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| {
            let t = x / r;
            if t.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - t * t)).exp()
            }
        }
    }

    #[test]
    fn kronrod_rule_is_exact_on_polynomials() {
        let (v, e) = gk15(&|x| Complex64::new(x.powi(20), 0.0), -1.0, 1.0);
        assert!((v.re - 2.0 / 21.0).abs() < 1e-15);
        assert!(e > 0.0);
        // degree 13 is within reach of the embedded Gauss rule
        let (v, e) = gk15(&|x| Complex64::new(x.powi(12), 0.0), -1.0, 1.0);
        assert!((v.re - 2.0 / 13.0).abs() < 1e-15 && e < 1e-15);
        let w: f64 = rule().iter().map(|r| r.2).sum();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude() {
        let r = osc_integral_1d(|x| x, |_| 0.0, 1e3, (-1.0, 1.0), &QuadOptions::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn stationary_phase_leading_term() {
        let h = smooth(1.0);
        let k = 1e4;
        let r = osc_integral_1d(|x| 0.5 * x * x, &h, k, (-1.0, 1.0), &QuadOptions::default()).unwrap();
        let lead = (2.0 * PI / k).sqrt() * h(0.0);
        assert!((r.value.norm() / lead - 1.0).abs() < 0.05, "{}", r.value.norm() / lead);
        assert!(r.error_estimate < 1e-8 * r.value.norm());
    }

    #[test]
    fn non_stationary_decay_is_fast() {
        // narrow bump so the value at K = 10^4 is still well above rounding
        let h = smooth(0.046);
        let o = QuadOptions::default();
        let a = osc_integral_1d(|x| x, &h, 1e4, (-0.05, 0.05), &o).unwrap();
        let b = osc_integral_1d(|x| x, &h, 2e4, (-0.05, 0.05), &o).unwrap();
        assert!(a.value.norm() > 1e3 * a.error_estimate.max(1e-18), "{a:?}");
        assert!(b.value.norm() / a.value.norm() <= 2f64.powi(-5), "{} {}", a.value.norm(), b.value.norm());
    }

    #[test]
    fn linear_in_the_amplitude() {
        let h = smooth(1.0);
        let o = QuadOptions::default();
        let a = osc_integral_1d(|x| x * x * x - x, &h, 300.0, (-1.0, 1.0), &o).unwrap();
        let b = osc_integral_1d(|x| x * x * x - x, |x| 3.5 * h(x), 300.0, (-1.0, 1.0), &o).unwrap();
        assert!(a.error_estimate <= 1e-10 * a.value.norm(), "{a:?}");
        assert!((b.value - a.value * 3.5).norm() <= 1e-12 * b.value.norm(), "{a:?} {b:?}");
    }

    #[test]
    fn three_dimensional_gaussian_phase() {
        // separable: product of three one-dimensional stationary integrals
        let h = smooth(1.0);
        let o = QuadOptions::default();
        let k = 6.0;
        let one = osc_integral_1d(|x| 0.5 * x * x, &h, k, (-1.0, 1.0), &o).unwrap().value;
        let three = osc_integral_3d(
            |x| 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]),
            |x| h(x[0]) * h(x[1]) * h(x[2]),
            k,
            [(-1.0, 1.0); 3],
            &o,
        )
        .unwrap();
        let expect = one * one * one;
        assert!((three.value - expect).norm() < 1e-8 * expect.norm(), "{:?} {expect}", three.value);
    }

    #[test]
    fn too_large_k_reports_cost() {
        let o = QuadOptions::default();
        let r = osc_integral_1d(|x| x, smooth(1.0), 1e12, (-1.0, 1.0), &o);
        match r {
            Err(Error::Cost { suggested_max_k, .. }) => assert!(suggested_max_k < 1e12 && suggested_max_k > 1e5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn amplitude_must_vanish_at_the_ends() {
        let r = osc_integral_1d(|x| x, |_| 1.0, 10.0, (-1.0, 1.0), &QuadOptions::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
