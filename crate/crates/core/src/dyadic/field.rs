//! Periodic 3-D grids and fields stored by their discrete Fourier coefficients.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Cubic periodic box `[-L/2, L/2)^3` sampled with `n` points per axis.
///
/// Index `i` along an axis sits at `x = i dx` for `i < n/2` and at
/// `(i - n) dx` otherwise, so the origin is index 0 and the signed
/// frequency of index `i` is `2π m / L` with the same wrapping.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    box_len: f64,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_len", &self.box_len)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_len == other.box_len
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub box_length: f64,
}

impl Grid {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Validation(format!(
                "grid resolution must be even and at least 4, got {n}"
            )));
        }
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(Error::Validation(format!("box length must be positive, got {box_len}")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Grid {
            n,
            box_len,
            plans: Arc::new(plans),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            resolution: self.n,
            box_length: self.box_len,
        }
    }

    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    /// Lattice spacing on the Fourier side.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    /// Signed integer mode of an axis index.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dx()
    }

    #[inline]
    pub fn freq(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dk()
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn join(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n + i[1]) * self.n + i[2]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.split(idx);
        [self.freq(a), self.freq(b), self.freq(c)]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.split(idx);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    /// `|ξ|^2` for every Fourier index.
    pub fn freq_norm_sq(&self) -> Vec<f64> {
        let f: Vec<f64> = (0..self.n).map(|i| self.freq(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        for a in &f {
            for b in &f {
                for c in &f {
                    out.push(a * a + b * b + c * c);
                }
            }
        }
        out
    }

    /// `|x|` for every physical index.
    pub fn radius(&self) -> Vec<f64> {
        let x: Vec<f64> = (0..self.n).map(|i| self.coord(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        for a in &x {
            for b in &x {
                for c in &x {
                    out.push((a * a + b * b + c * c).sqrt());
                }
            }
        }
        out
    }

    /// Largest `|x|` present in the box.
    pub fn max_radius(&self) -> f64 {
        3f64.sqrt() * self.box_len / 2.0
    }

    /// Largest resolved `|ξ|` along an axis.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.box_len
    }

    fn fft_axes(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // innermost axis is contiguous
        plan.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // middle axis
        for a in 0..n {
            for c in 0..n {
                for b in 0..n {
                    line[b] = data[(a * n + b) * n + c];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for b in 0..n {
                    data[(a * n + b) * n + c] = line[b];
                }
            }
        }
        // outer axis, gathered a plane at a time to keep access sequential
        let mut plane = vec![Complex64::new(0.0, 0.0); n * n];
        for b in 0..n {
            for a in 0..n {
                let src = &data[(a * n + b) * n..(a * n + b) * n + n];
                for c in 0..n {
                    plane[c * n + a] = src[c];
                }
            }
            plan.process_with_scratch(&mut plane, &mut scratch);
            for a in 0..n {
                for c in 0..n {
                    data[(a * n + b) * n + c] = plane[c * n + a];
                }
            }
        }
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.fft_axes(data, false);
    }

    /// Normalized inverse transform, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.fft_axes(data, true);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// A field held by its discrete Fourier coefficients
/// `f̂_m = Σ_x f(x) e^{-i ξ_m · x}` on a [`Grid`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coefficients(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            data,
        })
    }

    pub fn from_physical(grid: &Grid, mut values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        grid.forward(&mut values);
        Ok(SpectralField {
            grid: grid.clone(),
            data: values,
        })
    }

    /// Samples `f` at every grid point and transforms.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::from_physical(grid, values).expect("length matches grid")
    }

    /// Builds the field directly from a Fourier-side symbol `g(ξ)`.
    pub fn from_symbol(grid: &Grid, g: impl Fn([f64; 3]) -> Complex64) -> Self {
        let data = (0..grid.len()).map(|i| g(grid.wavevector(i))).collect();
        SpectralField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.data
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut v = self.data.clone();
        self.grid.inverse(&mut v);
        v
    }

    /// Multiplies by a radial Fourier multiplier `m(|ξ|)`.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let norms = self.grid.freq_norm_sq();
        let data = self
            .data
            .iter()
            .zip(&norms)
            .map(|(v, n2)| v * m(n2.sqrt()))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Multiplies by a general Fourier multiplier `m(ξ)`.
    pub fn apply_radial_multiplier_complex(&self, m: impl Fn(f64) -> Complex64) -> Self {
        let norms = self.grid.freq_norm_sq();
        let data = self
            .data
            .iter()
            .zip(&norms)
            .map(|(v, n2)| v * m(n2.sqrt()))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn apply_multiplier(&self, m: impl Fn([f64; 3]) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v * m(self.grid.wavevector(i)))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Multiplies by `w(x)` in physical space.
    pub fn apply_physical(&self, w: impl Fn([f64; 3]) -> f64) -> Self {
        let mut v = self.to_physical();
        for (i, val) in v.iter_mut().enumerate() {
            *val *= w(self.grid.position(i));
        }
        Self::from_physical(&self.grid, v).expect("length matches grid")
    }

    pub fn scale(&self, s: Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(self.grid == other.grid);
        SpectralField {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.grid == other.grid);
        SpectralField {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn axpy(&mut self, a: Complex64, x: &Self) {
        for (y, xv) in self.data.iter_mut().zip(&x.data) {
            *y += a * xv;
        }
    }

    /// `‖f‖_{L^2}` of the physical field, via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        (s / n * self.grid.dx().powi(3)).sqrt()
    }

    /// `‖f̂‖_{L^1}` of the continuous transform approximated on the lattice.
    pub fn fourier_l1_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|v| v.norm()).sum();
        s * self.grid.dx().powi(3) * self.grid.dk().powi(3)
    }

    /// Maximum over grid points of the physical field.
    pub fn sup_norm_grid(&self) -> f64 {
        self.to_physical().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup norm of the trigonometric interpolant, refined by evaluating it on
    /// a `refine`-times finer sub-grid around the largest grid samples.
    pub fn sup_norm(&self, refine: usize) -> f64 {
        let phys = self.to_physical();
        let mut order: Vec<usize> = (0..phys.len()).collect();
        let take = 4.min(order.len());
        order.select_nth_unstable_by(take - 1, |a, b| {
            phys[*b].norm().partial_cmp(&phys[*a].norm()).unwrap()
        });
        let mut best = order[..take].iter().map(|i| phys[*i].norm()).fold(0.0, f64::max);
        if refine <= 1 {
            return best;
        }
        let dx = self.grid.dx();
        let r = refine as i64;
        let offsets: Vec<f64> = (-r / 2..=r / 2).map(|o| o as f64 * dx / refine as f64).collect();
        for &idx in &order[..take] {
            let p = self.grid.position(idx);
            let axes: [Vec<f64>; 3] = [
                offsets.iter().map(|o| p[0] + o).collect(),
                offsets.iter().map(|o| p[1] + o).collect(),
                offsets.iter().map(|o| p[2] + o).collect(),
            ];
            for v in self.interpolate_tensor(&axes) {
                best = best.max(v.norm());
            }
        }
        best
    }

    /// Evaluates the trigonometric interpolant on the tensor product of the
    /// given coordinates, contracting one axis at a time.
    pub fn interpolate_tensor(&self, axes: &[Vec<f64>; 3]) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.n();
        let freqs: Vec<f64> = (0..n)
            .map(|i| if 2 * i == n { 0.0 } else { g.freq(i) })
            .collect();
        let phase = |xs: &Vec<f64>| -> Vec<Complex64> {
            let mut out = Vec::with_capacity(xs.len() * n);
            for &x in xs {
                for (i, k) in freqs.iter().enumerate() {
                    // the Nyquist mode is split evenly between ±n/2
                    let w = if 2 * i == n {
                        Complex64::new((std::f64::consts::PI * n as f64 / g.box_len() * x).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, k * x)
                    };
                    out.push(w);
                }
            }
            out
        };
        let e0 = phase(&axes[0]);
        let e1 = phase(&axes[1]);
        let e2 = phase(&axes[2]);
        let (n0, n1, n2) = (axes[0].len(), axes[1].len(), axes[2].len());
        // contract axis 0: t1[p][b][c]
        let mut t1 = vec![Complex64::new(0.0, 0.0); n0 * n * n];
        for p in 0..n0 {
            let out = &mut t1[p * n * n..(p + 1) * n * n];
            for a in 0..n {
                let w = e0[p * n + a];
                let src = &self.data[a * n * n..(a + 1) * n * n];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        let mut t2 = vec![Complex64::new(0.0, 0.0); n0 * n1 * n];
        for p in 0..n0 {
            for q in 0..n1 {
                let out = &mut t2[(p * n1 + q) * n..(p * n1 + q + 1) * n];
                for b in 0..n {
                    let w = e1[q * n + b];
                    let src = &t1[(p * n + b) * n..(p * n + b + 1) * n];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        }
        let scale = 1.0 / g.len() as f64;
        let mut res = Vec::with_capacity(n0 * n1 * n2);
        for p in 0..n0 {
            for q in 0..n1 {
                let src = &t2[(p * n1 + q) * n..(p * n1 + q + 1) * n];
                for r in 0..n2 {
                    let s: Complex64 = src.iter().zip(&e2[r * n..(r + 1) * n]).map(|(a, b)| a * b).sum();
                    res.push(s * scale);
                }
            }
        }
        res
    }

    /// Fraction of the squared L² mass sitting in the outer layer
    /// `max_i |x_i| > (1/2 - margin) L` of the box.
    pub fn boundary_mass_fraction(&self, margin: f64) -> f64 {
        let phys = self.to_physical();
        let lim = (0.5 - margin) * self.grid.box_len();
        let (mut edge, mut total) = (0.0, 0.0);
        for (i, v) in phys.iter().enumerate() {
            let p = self.grid.position(i);
            let m = v.norm_sqr();
            total += m;
            if p.iter().any(|x| x.abs() > lim) {
                edge += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Applies `f̂(ξ) -> conj(f̂(-ξ))`, the Fourier image of complex conjugation.
    pub fn conj_reflect(&self) -> Self {
        let n = self.grid.n();
        let neg = |i: usize| (n - i) % n;
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    data[(a * n + b) * n + c] = self.data[(neg(a) * n + neg(b)) * n + neg(c)].conj();
                }
            }
        }
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
