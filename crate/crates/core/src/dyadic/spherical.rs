//! Angular Littlewood-Paley projectors on lattice spheres.
//!
//! Lattice points with the same integer `|m|^2` lie on one exact sphere.
//! On each such shell the real spherical harmonics are orthonormalized in
//! order of increasing degree against the counting measure; the part of the
//! data not captured by degrees up to the cap is treated as a single block of
//! degree `cap + 1`. `S_l` then weights each degree block by `φ_l(q)`, which
//! makes it a sum of commuting orthogonal projections with weights in `[0,1]`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::field::{Grid, SpectralField};
use super::{shell, up_to, PLATEAU};
use crate::error::{Error, Result};
use crate::special::real_harmonics;

struct ShellBasis {
    indices: Vec<usize>,
    /// Orthonormal columns, each stored contiguously.
    columns: Vec<Vec<f64>>,
    degrees: Vec<usize>,
}

/// Precomputed per-grid harmonic analysis; reusable across fields.
pub struct SphericalAnalysis {
    grid: Grid,
    degree_cap: usize,
    shells: Vec<ShellBasis>,
}

impl std::fmt::Debug for SphericalAnalysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphericalAnalysis")
            .field("grid", &self.grid)
            .field("degree_cap", &self.degree_cap)
            .field("shells", &self.shells.len())
            .finish()
    }
}

/// Weight of degree `q` in angular band `l`.
pub fn angular_weight(l: i32, q: f64) -> f64 {
    if l == 0 {
        up_to(0, q)
    } else {
        shell(l, q)
    }
}

impl SphericalAnalysis {
    pub fn new(grid: &Grid, degree_cap: usize) -> Self {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for idx in 0..grid.len() {
            let [a, b, c] = grid.split(idx);
            let (ma, mb, mc) = (grid.mode(a), grid.mode(b), grid.mode(c));
            groups.entry(ma * ma + mb * mb + mc * mc).or_default().push(idx);
        }
        let shells = groups
            .into_iter()
            .map(|(norm, indices)| build_shell(grid, norm, indices, degree_cap))
            .collect();
        SphericalAnalysis {
            grid: grid.clone(),
            degree_cap,
            shells,
        }
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Highest band `l` whose weights reach a resolved degree.
    pub fn max_band(&self) -> i32 {
        let mut l = 0;
        while 0.5 * PLATEAU * 2f64.powi(l + 1) < (self.degree_cap + 1) as f64 {
            l += 1;
        }
        l
    }

    fn check(&self, f: &SpectralField, l: i32) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::Validation("field and analysis use different grids".into()));
        }
        if l < 0 {
            return Err(Error::Domain(format!("angular band {l} must be non-negative")));
        }
        if l > 0 && 0.5 * PLATEAU * 2f64.powi(l) >= (self.degree_cap + 1) as f64 {
            return Err(Error::BandLimit(format!(
                "angular band {l} needs degrees above the resolved cap {}",
                self.degree_cap
            )));
        }
        Ok(())
    }

    /// Applies `S_l`.
    pub fn project(&self, f: &SpectralField, l: i32) -> Result<SpectralField> {
        self.check(f, l)?;
        let resid_weight = angular_weight(l, (self.degree_cap + 1) as f64);
        let src = f.coefficients();
        let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
        let mut vals = Vec::new();
        for sh in &self.shells {
            vals.clear();
            vals.extend(sh.indices.iter().map(|i| src[*i]));
            let mut captured = vec![Complex64::new(0.0, 0.0); vals.len()];
            let mut result = vec![Complex64::new(0.0, 0.0); vals.len()];
            for (col, &q) in sh.columns.iter().zip(&sh.degrees) {
                let coef: Complex64 = col.iter().zip(&vals).map(|(u, v)| v * *u).sum();
                let w = angular_weight(l, q as f64);
                for ((c, r), u) in captured.iter_mut().zip(result.iter_mut()).zip(col) {
                    *c += coef * *u;
                    *r += coef * (w * *u);
                }
            }
            if resid_weight != 0.0 {
                for ((r, v), c) in result.iter_mut().zip(&vals).zip(&captured) {
                    *r += (v - c) * resid_weight;
                }
            }
            for (i, r) in sh.indices.iter().zip(result) {
                out[*i] = r;
            }
        }
        SpectralField::from_coefficients(&self.grid, out)
    }
}

fn build_shell(grid: &Grid, norm: i64, indices: Vec<usize>, cap: usize) -> ShellBasis {
    let p = indices.len();
    if norm == 0 {
        return ShellBasis {
            columns: vec![vec![1.0]],
            degrees: vec![0],
            indices,
        };
    }
    let qs = (((2 * p) as f64).sqrt() as usize).saturating_sub(1).min(cap);
    let r = (norm as f64).sqrt();
    let dirs: Vec<[f64; 3]> = indices
        .iter()
        .map(|&i| {
            let [a, b, c] = grid.split(i);
            [
                grid.mode(a) as f64 / r,
                grid.mode(b) as f64 / r,
                grid.mode(c) as f64 / r,
            ]
        })
        .collect();
    let ys: Vec<Vec<f64>> = dirs.iter().map(|d| real_harmonics(qs, *d)).collect();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut degrees = Vec::new();
    'outer: for q in 0..=qs {
        for m in (q * q)..((q + 1) * (q + 1)) {
            if columns.len() == p {
                break 'outer;
            }
            let mut v: Vec<f64> = ys.iter().map(|y| y[m]).collect();
            let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for c in &columns {
                    let d: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= d * ci;
                    }
                }
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv < 1e-8 * n0 {
                continue;
            }
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            columns.push(v);
            degrees.push(q);
        }
    }
    ShellBasis {
        indices,
        columns,
        degrees,
    }
}

/// One-shot `S_l` for callers that do not reuse the analysis.
pub fn spherical_project(f: &SpectralField, l: i32, degree_cap: usize) -> Result<SpectralField> {
    SphericalAnalysis::new(f.grid(), degree_cap).project(f, l)
}
