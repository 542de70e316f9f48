//! First-order diagonalization of the quadratic system and pseudo-spectral
//! integration of the profile equation.
//!
//! With `v_σ = (∂_t - iΛ_σ) u_σ` and `f_σ = e^{itΛ_σ} v_σ`, the profiles obey
//! `∂_t f̂_σ = e^{itΛ_σ} Q̂_α` for `α = |σ|`. The right-hand side is evaluated
//! by recovering `u` and `∂_t u` from the profiles, forming `Q_α` by products
//! in physical space and transforming back under the 2/3 truncation rule.

pub mod energy;
pub mod evolve;

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_complex::Complex64;

use crate::dyadic::{Grid, SpectralField};
use crate::error::{Error, Result};
use crate::params::{PhaseTriple, SignedIndex, Slot, SystemParams};

pub use energy::symmetrized_energy;
pub use evolve::{
    cauchy_defect, evolve, scattering_check, Abort, EvolveOptions, Scheme, SnapshotDiagnostics, Trajectory,
    ZSample,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size above which a coefficient outside the dealiasing mask
/// counts as aliasing.
const ALIAS_TOL: f64 = 1e-13;

/// Profiles `f̂_σ` for every signed index at time `t`.
#[derive(Debug, Clone)]
pub struct ProfileState {
    pub t: f64,
    pub fhat: BTreeMap<SignedIndex, SpectralField>,
}

impl ProfileState {
    pub fn zeros(grid: &Grid, dim: usize, t: f64) -> Self {
        let fhat = SignedIndex::all(dim)
            .into_iter()
            .map(|s| (s, SpectralField::zeros(grid)))
            .collect();
        ProfileState { t, fhat }
    }

    pub fn dim(&self) -> usize {
        self.fhat.len() / 2
    }

    pub fn grid(&self) -> &Grid {
        self.fhat.values().next().expect("state holds at least one profile").grid()
    }

    pub fn get(&self, s: SignedIndex) -> &SpectralField {
        &self.fhat[&s]
    }

    /// `(Σ_σ ‖f_σ‖²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.fhat.values().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// `L²` distance between the profiles of two states on the same grid.
    pub fn distance(&self, other: &Self) -> f64 {
        self.fhat
            .iter()
            .map(|(s, f)| f.sub(&other.fhat[s]).l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `(Σ_σ ‖⟨ξ⟩^N f_σ‖²)^{1/2}`.
    pub fn sobolev_norm(&self, order: u32) -> f64 {
        self.fhat
            .values()
            .map(|f| {
                f.apply_radial_multiplier(|r| (1.0 + r * r).powf(order as f64 / 2.0))
                    .l2_norm()
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.fhat
            .values()
            .all(|f| f.coefficients().iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Largest coefficient of `f_{-α} - conj(f̂_α(-ξ))`, zero for real data.
    pub fn symmetry_drift(&self) -> f64 {
        self.fhat
            .iter()
            .filter(|(s, _)| s.raw() > 0)
            .map(|(s, f)| f.conj_reflect().max_abs_diff(&self.fhat[&s.flipped()]))
            .fold(0.0, f64::max)
    }

    /// Replaces each conjugate pair by its average, restoring the symmetry
    /// exactly.
    pub fn project_symmetric(&mut self) {
        let pos: Vec<SignedIndex> = self.fhat.keys().copied().filter(|s| s.raw() > 0).collect();
        for s in pos {
            let mut avg = self.fhat[&s].add(&self.fhat[&s.flipped()].conj_reflect());
            avg = avg.scale(Complex64::new(0.5, 0.0));
            self.fhat.insert(s.flipped(), avg.conj_reflect());
            self.fhat.insert(s, avg);
        }
    }

    /// Copy with every coefficient outside the dealiasing mask set to zero.
    pub fn dealiased(&self) -> Self {
        let mask = dealias_mask(self.grid());
        let fhat = self
            .fhat
            .iter()
            .map(|(s, f)| (*s, masked(f, &mask)))
            .collect();
        ProfileState { t: self.t, fhat }
    }

    /// `self + a * rate`, keeping the time.
    fn plus(&self, a: f64, rate: &BTreeMap<SignedIndex, SpectralField>) -> Self {
        let mut out = self.clone();
        for (s, f) in out.fhat.iter_mut() {
            f.axpy(Complex64::new(a, 0.0), &rate[s]);
        }
        out
    }
}

/// Keeps modes with every `|m_i| <= (n - 1) / 3`; products of two such
/// fields alias only onto modes the mask removes.
pub fn dealias_mask(g: &Grid) -> Vec<bool> {
    let cut = ((g.n() - 1) / 3) as i64;
    (0..g.len())
        .map(|idx| g.split(idx).iter().all(|a| g.mode(*a).abs() <= cut))
        .collect()
}

fn masked(f: &SpectralField, mask: &[bool]) -> SpectralField {
    let mut out = f.clone();
    for (v, keep) in out.coefficients_mut().iter_mut().zip(mask) {
        if !keep {
            *v = ZERO;
        }
    }
    out
}

fn check_grids(fields: &[&SpectralField]) -> Result<()> {
    if let Some(first) = fields.first() {
        if fields.iter().any(|f| f.grid() != first.grid()) {
            return Err(Error::Validation("fields live on different grids".into()));
        }
    }
    Ok(())
}

/// `Λ_α(ξ) = sqrt(c_α²|ξ|² + b_α²)` on the lattice, one vector per component.
fn dispersion_tables(p: &SystemParams, g: &Grid) -> Vec<Vec<f64>> {
    let norms = g.freq_norm_sq();
    (0..p.dim())
        .map(|a| {
            let (b, c) = (p.mass(a), p.speed(a));
            norms.iter().map(|n2| (c * c * n2 + b * b).sqrt()).collect()
        })
        .collect()
}

/// Profiles at `t = 0` from real data `g = u(0)` and `h = ∂_t u(0)`:
/// `v_{±α} = h_α ∓ iΛ_α g_α`.
pub fn diagonalize(g: &[SpectralField], h: &[SpectralField], p: &SystemParams) -> Result<ProfileState> {
    let d = p.dim();
    if g.len() != d || h.len() != d {
        return Err(Error::Validation(format!(
            "expected {d} components, got {} values and {} velocities",
            g.len(),
            h.len()
        )));
    }
    let all: Vec<&SpectralField> = g.iter().chain(h).collect();
    check_grids(&all)?;
    let grid = g[0].grid();
    let lam = dispersion_tables(p, grid);
    let mut fhat = BTreeMap::new();
    for a in 0..d {
        for sign in [1.0, -1.0] {
            let data = g[a]
                .coefficients()
                .iter()
                .zip(h[a].coefficients())
                .zip(&lam[a])
                .map(|((gv, hv), l)| hv - Complex64::new(0.0, sign * l) * gv)
                .collect();
            let s = SignedIndex::new(sign as i32 * (a as i32 + 1), d)?;
            fhat.insert(s, SpectralField::from_coefficients(grid, data)?);
        }
    }
    Ok(ProfileState { t: 0.0, fhat })
}

/// Fourier data of `u_α` and `∂_t u_α` recovered from the profiles.
pub fn invert(state: &ProfileState, p: &SystemParams) -> (Vec<SpectralField>, Vec<SpectralField>) {
    let lam = dispersion_tables(p, state.grid());
    recover(state, &lam)
}

fn recover(state: &ProfileState, lam: &[Vec<f64>]) -> (Vec<SpectralField>, Vec<SpectralField>) {
    let g = state.grid();
    let d = state.dim();
    let mut u = Vec::with_capacity(d);
    let mut ut = Vec::with_capacity(d);
    for (a, l) in lam.iter().enumerate().take(d) {
        let plus = state.fhat[&SignedIndex::new(a as i32 + 1, d).expect("component in range")].coefficients();
        let minus = state.fhat[&SignedIndex::new(-(a as i32 + 1), d).expect("component in range")].coefficients();
        let mut uv = Vec::with_capacity(g.len());
        let mut utv = Vec::with_capacity(g.len());
        for i in 0..g.len() {
            // v_{±α} = e^{∓itΛ} f_{±α}
            let e = Complex64::from_polar(1.0, -state.t * l[i]);
            let vp = e * plus[i];
            let vm = e.conj() * minus[i];
            utv.push((vp + vm) * 0.5);
            uv.push(Complex64::new(0.0, 0.5 / l[i]) * (vp - vm));
        }
        u.push(SpectralField::from_coefficients(g, uv).expect("length matches grid"));
        ut.push(SpectralField::from_coefficients(g, utv).expect("length matches grid"));
    }
    (u, ut)
}

/// Symbol of one factor `∂^D u` or `∂^D ∂_t u` written in terms of `v_μ` at
/// frequency `ζ`.
fn factor_symbol(p: &SystemParams, mu: SignedIndex, zeta: [f64; 3], time: bool, axes: &[usize]) -> Complex64 {
    let mut s = if time {
        Complex64::new(0.5, 0.0)
    } else {
        Complex64::new(0.0, 0.5 / p.dispersion(mu, &zeta))
    };
    for &ax in axes {
        s *= Complex64::new(0.0, zeta[ax]);
    }
    s
}

fn slot_parts(slot: Slot) -> (bool, Vec<usize>) {
    match slot {
        Slot::Value => (false, vec![]),
        Slot::Time => (true, vec![]),
        Slot::Space(ax) => (false, vec![ax]),
    }
}

/// The symbol `m_{σμν}(ξ, η)` multiplying `f̂_μ(ξ-η) f̂_ν(η)` in the Duhamel
/// formula, without the `(2π)^{-3}` of the continuous convolution. The first
/// factor of every product sits at `ξ - η`, the second at `η`.
pub fn multiplier_m(p: &SystemParams, triple: PhaseTriple, xi: [f64; 3], eta: [f64; 3]) -> Complex64 {
    let PhaseTriple { sigma, mu, nu } = triple;
    let zeta = [xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]];
    let (a, left, right) = (sigma.component(), mu.component(), nu.component());
    let mut m = ZERO;
    for j in 0..3 {
        for k in 0..3 {
            let second = factor_symbol(p, nu, eta, false, &[j, k]);
            let coeff = p.quad_u(a, right, left, j, k);
            if coeff != 0.0 {
                m += coeff * factor_symbol(p, mu, zeta, false, &[]) * second;
            }
            for l in 0..3 {
                let coeff = p.quad_du(a, right, left, j, k, l);
                if coeff != 0.0 {
                    m += coeff * factor_symbol(p, mu, zeta, false, &[l]) * second;
                }
            }
        }
    }
    for t in p.semilinear() {
        if t.target == a && t.left.component == left && t.right.component == right && t.coeff != 0.0 {
            let (lt, la) = slot_parts(t.left.slot);
            let (rt, ra) = slot_parts(t.right.slot);
            m += t.coeff * factor_symbol(p, mu, zeta, lt, &la) * factor_symbol(p, nu, eta, rt, &ra);
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Deriv {
    Value,
    Time,
    D1(usize),
    D2(usize, usize),
}

impl From<Slot> for Deriv {
    fn from(s: Slot) -> Self {
        match s {
            Slot::Value => Deriv::Value,
            Slot::Time => Deriv::Time,
            Slot::Space(ax) => Deriv::D1(ax),
        }
    }
}

/// Physical samples of `u`, `∂_t u` and their spatial derivatives, computed on
/// first use.
struct PhysicalFields<'a> {
    u: &'a [SpectralField],
    ut: &'a [SpectralField],
    cache: HashMap<(usize, Deriv), Rc<Vec<Complex64>>>,
}

impl<'a> PhysicalFields<'a> {
    fn new(u: &'a [SpectralField], ut: &'a [SpectralField]) -> Self {
        PhysicalFields {
            u,
            ut,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, comp: usize, d: Deriv) -> Rc<Vec<Complex64>> {
        let d = match d {
            Deriv::D2(j, k) if j > k => Deriv::D2(k, j),
            other => other,
        };
        if let Some(v) = self.cache.get(&(comp, d)) {
            return v.clone();
        }
        let axes = match d {
            Deriv::Value | Deriv::Time => vec![],
            Deriv::D1(j) => vec![j],
            Deriv::D2(j, k) => vec![j, k],
        };
        let base = if d == Deriv::Time { &self.ut[comp] } else { &self.u[comp] };
        let v = Rc::new(derivative(base, &axes).to_physical());
        self.cache.insert((comp, d), v.clone());
        v
    }
}

/// Spectral partial derivatives along `axes`, Nyquist planes dropped.
fn derivative(f: &SpectralField, axes: &[usize]) -> SpectralField {
    if axes.is_empty() {
        return f.clone();
    }
    let g = f.grid();
    let n = g.n();
    let mut out = f.clone();
    for (idx, v) in out.coefficients_mut().iter_mut().enumerate() {
        let ijk = g.split(idx);
        for &ax in axes {
            *v *= if 2 * ijk[ax] == n {
                ZERO
            } else {
                Complex64::new(0.0, g.freq(ijk[ax]))
            };
        }
    }
    out
}

/// Precomputed tables for repeated right-hand-side evaluations on one grid.
pub struct ProfileSolver {
    params: SystemParams,
    grid: Grid,
    lambda: Vec<Vec<f64>>,
    mask: Vec<bool>,
}

impl ProfileSolver {
    pub fn new(params: &SystemParams, grid: &Grid) -> Self {
        ProfileSolver {
            params: params.clone(),
            grid: grid.clone(),
            lambda: dispersion_tables(params, grid),
            mask: dealias_mask(grid),
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest `|Λ_α|` over the retained modes.
    pub fn max_dispersion(&self) -> f64 {
        self.lambda
            .iter()
            .flat_map(|l| l.iter().zip(&self.mask).filter(|(_, k)| **k).map(|(v, _)| *v))
            .fold(0.0, f64::max)
    }

    pub fn invert(&self, state: &ProfileState) -> (Vec<SpectralField>, Vec<SpectralField>) {
        recover(state, &self.lambda)
    }

    /// Errors if a profile carries mass outside the dealiasing mask.
    pub fn check_dealiased(&self, state: &ProfileState) -> Result<()> {
        for (s, f) in &state.fhat {
            if f.grid() != &self.grid {
                return Err(Error::Validation(format!("profile {s} lives on a different grid")));
            }
            let c = f.coefficients();
            let scale = f.max_abs();
            if let Some(i) = (0..c.len()).find(|i| !self.mask[*i] && c[*i].norm() > ALIAS_TOL * scale) {
                let m = self.grid.split(i).map(|a| self.grid.mode(a));
                return Err(Error::Aliasing(format!(
                    "profile {s} has weight {:.3e} at mode {m:?}, outside the 2/3 mask |m| <= {}; \
                     zero-pad the data first",
                    c[i].norm(),
                    (self.grid.n() - 1) / 3
                )));
            }
        }
        Ok(())
    }

    /// Fourier data of `Q_α(u, ∂u)`, truncated to the mask.
    pub fn nonlinearity(&self, u: &[SpectralField], ut: &[SpectralField]) -> Vec<SpectralField> {
        let p = &self.params;
        let d = p.dim();
        let len = self.grid.len();
        let mut phys = PhysicalFields::new(u, ut);
        let mut out = Vec::with_capacity(d);
        for a in 0..d {
            let mut acc = vec![ZERO; len];
            let mut touched = false;
            for b in 0..d {
                for j in 0..3 {
                    for k in 0..3 {
                        let mut coef: Option<Vec<Complex64>> = None;
                        for g in 0..d {
                            let cu = p.quad_u(a, b, g, j, k);
                            if cu != 0.0 {
                                let ug = phys.get(g, Deriv::Value);
                                let s = coef.get_or_insert_with(|| vec![ZERO; len]);
                                s.iter_mut().zip(ug.iter()).for_each(|(s, v)| *s += cu * v);
                            }
                            for l in 0..3 {
                                let cd = p.quad_du(a, b, g, j, k, l);
                                if cd != 0.0 {
                                    let dg = phys.get(g, Deriv::D1(l));
                                    let s = coef.get_or_insert_with(|| vec![ZERO; len]);
                                    s.iter_mut().zip(dg.iter()).for_each(|(s, v)| *s += cd * v);
                                }
                            }
                        }
                        if let Some(s) = coef {
                            let second = phys.get(b, Deriv::D2(j, k));
                            acc.iter_mut()
                                .zip(s.iter().zip(second.iter()))
                                .for_each(|(o, (x, y))| *o += x * y);
                            touched = true;
                        }
                    }
                }
            }
            for t in p.semilinear().iter().filter(|t| t.target == a && t.coeff != 0.0) {
                let l = phys.get(t.left.component, t.left.slot.into());
                let r = phys.get(t.right.component, t.right.slot.into());
                acc.iter_mut()
                    .zip(l.iter().zip(r.iter()))
                    .for_each(|(o, (x, y))| *o += t.coeff * x * y);
                touched = true;
            }
            let q = if touched {
                masked(
                    &SpectralField::from_physical(&self.grid, acc).expect("length matches grid"),
                    &self.mask,
                )
            } else {
                SpectralField::zeros(&self.grid)
            };
            out.push(q);
        }
        out
    }

    /// `∂_t f̂_σ = e^{itΛ_σ} Q̂_α` for every `σ`.
    pub fn rhs(&self, state: &ProfileState) -> Result<BTreeMap<SignedIndex, SpectralField>> {
        self.check_dealiased(state)?;
        Ok(self.rhs_unchecked(state))
    }

    pub(crate) fn rhs_unchecked(&self, state: &ProfileState) -> BTreeMap<SignedIndex, SpectralField> {
        let d = self.params.dim();
        let mut out = BTreeMap::new();
        if self.params.is_free() {
            for s in state.fhat.keys() {
                out.insert(*s, SpectralField::zeros(&self.grid));
            }
            return out;
        }
        let (u, ut) = self.invert(state);
        let q = self.nonlinearity(&u, &ut);
        for (a, qa) in q.iter().enumerate() {
            let mut plus = Vec::with_capacity(self.grid.len());
            let mut minus = Vec::with_capacity(self.grid.len());
            for (v, l) in qa.coefficients().iter().zip(&self.lambda[a]) {
                let e = Complex64::from_polar(1.0, state.t * l);
                plus.push(e * v);
                minus.push(e.conj() * v);
            }
            let idx = a as i32 + 1;
            let sp = SignedIndex::new(idx, d).expect("component in range");
            out.insert(sp, SpectralField::from_coefficients(&self.grid, plus).expect("length matches grid"));
            out.insert(
                sp.flipped(),
                SpectralField::from_coefficients(&self.grid, minus).expect("length matches grid"),
            );
        }
        out
    }
}

/// Time derivative of every profile at `state.t`.
pub fn duhamel_rhs(state: &ProfileState, p: &SystemParams) -> Result<BTreeMap<SignedIndex, SpectralField>> {
    if state.dim() != p.dim() {
        return Err(Error::Validation(format!(
            "state has {} components, system has {}",
            state.dim(),
            p.dim()
        )));
    }
    ProfileSolver::new(p, state.grid()).rhs(state)
}
