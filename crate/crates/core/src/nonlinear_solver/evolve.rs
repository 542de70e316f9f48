//! Time stepping of the profile equation with snapshot diagnostics.

use serde::{Deserialize, Serialize};

use super::{derivative, symmetrized_energy, ProfileSolver, ProfileState};
use crate::dyadic::{localize, Localization};
use crate::error::{Error, Result};
use crate::linear_flow::{z_diagnostic, DiagnosticCaps};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical fourth-order Runge-Kutta on the profiles.
    Rk4Profile,
    /// Second-order midpoint rule on the profiles; the linear part is
    /// already integrated exactly by the profile change of variables.
    ExponentialMidpoint,
}

impl Scheme {
    /// Largest tolerated `dt · max|Φ|`, with `|Φ| <= 3 max Λ`.
    fn phase_budget(self) -> f64 {
        match self {
            Scheme::Rk4Profile => 2.5,
            Scheme::ExponentialMidpoint => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Time between snapshots, rounded to a whole number of steps.
    pub snapshot_every: f64,
    /// Vector-field order of the monitored energy.
    pub energy_order: usize,
    pub caps: DiagnosticCaps,
    /// `(j, k)` pairs at which `Z` is sampled for every positive profile.
    pub z_samples: Vec<(i32, i32)>,
    /// Sub-grid refinement of the sup norms.
    pub sup_refine: usize,
    /// Growth of the profile norm over its initial value treated as blow-up.
    pub blowup_factor: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            t_end: 10.0,
            dt: 0.05,
            scheme: Scheme::Rk4Profile,
            snapshot_every: 1.0,
            energy_order: 0,
            caps: DiagnosticCaps::default(),
            z_samples: vec![(0, 0)],
            sup_refine: 2,
            blowup_factor: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZSample {
    pub sigma: i32,
    pub j: i32,
    pub k: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub t: f64,
    pub energy: f64,
    /// `H^{N}` norm of the profiles, `N = caps.n_sub`.
    pub sobolev_norm: f64,
    pub l2_norm: f64,
    pub sup_u: f64,
    /// Sup over components of `|∂_t u|` and `|∂_j u|`.
    pub sup_du: f64,
    pub z: Vec<ZSample>,
    /// `‖f(t) - f(t_prev)‖₂` against the previous snapshot, zero for the first.
    pub cauchy_defect: f64,
    /// Largest conjugation drift seen before projection since the previous
    /// snapshot.
    pub symmetry_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<ProfileState>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
    pub scheme: Scheme,
    pub dt: f64,
    /// Set when the run stopped early; the last snapshot is then the last
    /// finite state.
    pub aborted: Option<Abort>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn max_symmetry_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.symmetry_drift).fold(0.0, f64::max)
    }
}

fn diagnose(
    solver: &ProfileSolver,
    state: &ProfileState,
    prev: Option<&ProfileState>,
    drift: f64,
    o: &EvolveOptions,
) -> Result<SnapshotDiagnostics> {
    let p = solver.params();
    let (u, ut) = solver.invert(state);
    let energy = symmetrized_energy(&u, &ut, p, o.energy_order, &o.caps)?;
    let sup_u = u.iter().map(|f| f.sup_norm(o.sup_refine)).fold(0.0, f64::max);
    let mut sup_du = ut.iter().map(|f| f.sup_norm(o.sup_refine)).fold(0.0, f64::max);
    for f in &u {
        for j in 0..3 {
            sup_du = sup_du.max(derivative(f, &[j]).sup_norm(o.sup_refine));
        }
    }
    let mut z = Vec::new();
    for (s, f) in state.fhat.iter().filter(|(s, _)| s.raw() > 0) {
        for &(j, k) in &o.z_samples {
            let piece = localize(f, Localization::Star { j, k })?.field;
            z.push(ZSample {
                sigma: s.raw(),
                j,
                k,
                value: z_diagnostic(&piece, j, k, &o.caps)?,
            });
        }
    }
    Ok(SnapshotDiagnostics {
        t: state.t,
        energy,
        sobolev_norm: state.sobolev_norm(o.caps.n_sub),
        l2_norm: state.l2_norm(),
        sup_u,
        sup_du,
        z,
        cauchy_defect: prev.map_or(0.0, |q| state.distance(q)),
        symmetry_drift: drift,
    })
}

fn step(solver: &ProfileSolver, s: &ProfileState, dt: f64, scheme: Scheme) -> ProfileState {
    let at = |st: &ProfileState, t: f64| {
        let mut st = st.clone();
        st.t = t;
        st
    };
    let t = s.t;
    let mut next = match scheme {
        Scheme::Rk4Profile => {
            let k1 = solver.rhs_unchecked(s);
            let k2 = solver.rhs_unchecked(&at(&s.plus(dt / 2.0, &k1), t + dt / 2.0));
            let k3 = solver.rhs_unchecked(&at(&s.plus(dt / 2.0, &k2), t + dt / 2.0));
            let k4 = solver.rhs_unchecked(&at(&s.plus(dt, &k3), t + dt));
            let mut out = s.plus(dt / 6.0, &k1);
            for (kk, w) in [(&k2, dt / 3.0), (&k3, dt / 3.0), (&k4, dt / 6.0)] {
                out = out.plus(w, kk);
            }
            out
        }
        Scheme::ExponentialMidpoint => {
            let k1 = solver.rhs_unchecked(s);
            let k2 = solver.rhs_unchecked(&at(&s.plus(dt / 2.0, &k1), t + dt / 2.0));
            s.plus(dt, &k2)
        }
    };
    next.t = t + dt;
    next
}

/// Integrates the profile equation from `initial` to `o.t_end`.
pub fn evolve(initial: &ProfileState, p: &SystemParams, o: &EvolveOptions) -> Result<Trajectory> {
    if initial.dim() != p.dim() {
        return Err(Error::Validation(format!(
            "state has {} components, system has {}",
            initial.dim(),
            p.dim()
        )));
    }
    if !(o.dt > 0.0 && o.dt.is_finite()) || !(o.t_end > 0.0 && o.t_end.is_finite()) {
        return Err(Error::Validation(format!("dt = {} and T = {} must be positive", o.dt, o.t_end)));
    }
    if !(o.snapshot_every > 0.0) || !(o.blowup_factor > 1.0) {
        return Err(Error::Validation("snapshot cadence and blow-up factor must be positive".into()));
    }
    o.caps.validate()?;
    let steps = (o.t_end / o.dt).round() as usize;
    if steps == 0 || ((steps as f64) * o.dt - o.t_end).abs() > 1e-9 * o.t_end {
        return Err(Error::Validation(format!(
            "T = {} is not a whole number of steps dt = {}",
            o.t_end, o.dt
        )));
    }
    let stride = ((o.snapshot_every / o.dt).round() as usize).max(1);
    let solver = ProfileSolver::new(p, initial.grid());
    let phase = o.dt * 3.0 * solver.max_dispersion();
    if phase > o.scheme.phase_budget() {
        return Err(Error::Validation(format!(
            "dt * max|Φ| = {phase:.3} exceeds {} for {:?}; reduce dt",
            o.scheme.phase_budget(),
            o.scheme
        )));
    }
    solver.check_dealiased(initial)?;

    let mut state = initial.clone();
    let mut drift = state.symmetry_drift();
    state.project_symmetric();
    let start_norm = state.l2_norm();
    let mut traj = Trajectory {
        diagnostics: vec![diagnose(&solver, &state, None, drift, o)?],
        states: vec![state.clone()],
        scheme: o.scheme,
        dt: o.dt,
        aborted: None,
    };
    drift = 0.0;
    for n in 1..=steps {
        let mut next = step(&solver, &state, o.dt, o.scheme);
        next.t = initial.t + n as f64 * o.dt;
        let norm = next.l2_norm();
        let reason = if !next.is_finite() || !norm.is_finite() {
            Some("non-finite profile".to_string())
        } else if start_norm > 0.0 && norm > o.blowup_factor * start_norm {
            Some(format!("profile norm grew by {:.3e}", norm / start_norm))
        } else {
            None
        };
        if let Some(reason) = reason {
            if traj.states.last().map(|s| s.t) != Some(state.t) {
                let prev = traj.states.last().cloned();
                traj.diagnostics.push(diagnose(&solver, &state, prev.as_ref(), drift, o)?);
                traj.states.push(state.clone());
            }
            traj.aborted = Some(Abort { t: next.t, reason });
            return Ok(traj);
        }
        drift = drift.max(next.symmetry_drift());
        next.project_symmetric();
        state = next;
        if n % stride == 0 || n == steps {
            let prev = traj.states.last().cloned();
            traj.diagnostics.push(diagnose(&solver, &state, prev.as_ref(), drift, o)?);
            traj.states.push(state.clone());
            drift = 0.0;
        }
    }
    Ok(traj)
}

/// Largest `‖f(t₂) - f(t₁)‖₂` over snapshot pairs with times in `window`.
pub fn cauchy_defect(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    let tol = 1e-9 * window.1.abs().max(1.0);
    let tail: Vec<&ProfileState> = traj
        .states
        .iter()
        .filter(|s| s.t >= window.0 - tol && s.t <= window.1 + tol)
        .collect();
    if tail.len() < 3 {
        return Err(Error::Domain(format!(
            "{} snapshots in {window:?}; at least 3 are needed",
            tail.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            worst = worst.max(a.distance(b));
        }
    }
    Ok(worst)
}

/// Profile Cauchy defect over the last `tail_fraction` of the run.
pub fn scattering_check(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Validation(format!("tail fraction {tail_fraction} outside (0, 1]")));
    }
    let (Some(first), Some(last)) = (traj.states.first(), traj.states.last()) else {
        return Err(Error::Domain("empty trajectory".into()));
    };
    let cut = last.t - tail_fraction * (last.t - first.t);
    cauchy_defect(traj, (cut, last.t))
}
