//! Space-time resonances: common zeros of `Φ` and `∇_η Φ`.
//!
//! Away from the equal-speed case these lie on collinear frequencies, so the
//! search runs on the parallel phase in the `(α, β)` plane.

use serde::{Deserialize, Serialize};

use super::factor::{factor_dbeta, Factorization};
use super::{phase_derivatives, TripleBranches};
use crate::error::{Error, Result};
use crate::params::{PhaseTriple, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceKind {
    Empty,
    Finite,
    SphereFamily,
    /// The origin `ξ = η = 0` is resonant (mass-resonant, unequal speeds).
    DegenerateOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl SearchBox {
    pub fn square(half: f64) -> Self {
        SearchBox {
            alpha: (-half, half),
            beta: (-half, half),
        }
    }

    fn contains(&self, a: f64, b: f64, margin: f64) -> bool {
        a >= self.alpha.0 - margin && a <= self.alpha.1 + margin && b >= self.beta.0 - margin && b <= self.beta.1 + margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    /// Grid points per axis for seeding.
    pub grid: usize,
    /// Residual a polished point must reach on both equations.
    pub residual_tol: f64,
    pub dedup_radius: f64,
    /// Grid minima of `|Φ⁺| + |∂_β Φ⁺|` below this must converge or are
    /// listed as unresolved.
    pub seed_threshold: f64,
    /// Samples per unit of `α` for locating zeros of `Q`.
    pub q_samples_per_unit: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        ResonanceOptions {
            grid: 401,
            residual_tol: 1e-10,
            dedup_radius: 1e-6,
            seed_threshold: 0.05,
            q_samples_per_unit: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub alpha: f64,
    pub beta: f64,
    pub phase_residual: f64,
    pub dbeta_residual: f64,
    /// `∂_β² Φ⁺` at the point.
    pub dbeta2: f64,
    /// `det ∇_η² Φ` at `ξ = α e`, `η = β e`.
    pub hessian_det: f64,
    pub hessian_nondegenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QZeroLambda {
    pub alpha0: f64,
    pub beta0: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub kind: ResonanceKind,
    pub pairs: Vec<ResonancePoint>,
    /// Slope of the family `η = ρ ξ`.
    pub rho: Option<f64>,
    pub lambda_at_q_zero: Vec<QZeroLambda>,
    /// Seeds where Newton did not converge.
    pub unresolved: Vec<[f64; 2]>,
    pub search_box: SearchBox,
    pub options: ResonanceOptions,
    pub notes: Vec<String>,
}

fn newton(tb: &TripleBranches, mut a: f64, mut b: f64, tol: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let f1 = tb.parallel(a, b);
        let f2 = tb.parallel_dbeta(a, b);
        if f1.abs() <= 0.1 * tol && f2.abs() <= 0.1 * tol {
            return Some((a, b));
        }
        let j11 = tb.parallel_dalpha(a, b);
        let j12 = f2;
        let j21 = tb.mu.derivs(a - b)[2];
        let j22 = tb.parallel_derivs(a, b)[2];
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (f1 * j22 - j12 * f2) / det;
        let db = (j11 * f2 - j21 * f1) / det;
        a -= da;
        b -= db;
        if !(a.is_finite() && b.is_finite()) {
            return None;
        }
        if da.abs().max(db.abs()) < 1e-16 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let ok = tb.parallel(a, b).abs() <= tol && tb.parallel_dbeta(a, b).abs() <= tol;
    ok.then_some((a, b))
}

fn annotate(p: &SystemParams, t: &PhaseTriple, tb: &TripleBranches, a: f64, b: f64) -> ResonancePoint {
    let d = phase_derivatives(p, t, &[a, 0.0, 0.0], &[b, 0.0, 0.0]);
    let h = d.hess_eta;
    let det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    let scale = h.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).powi(3);
    ResonancePoint {
        alpha: a,
        beta: b,
        phase_residual: tb.parallel(a, b).abs(),
        dbeta_residual: tb.parallel_dbeta(a, b).abs(),
        dbeta2: tb.parallel_derivs(a, b)[2],
        hessian_det: det,
        hessian_nondegenerate: det.abs() > 1e-10 * scale.max(1e-300),
    }
}

fn q_zero_lambdas(p: &SystemParams, t: &PhaseTriple, bx: &SearchBox, o: &ResonanceOptions, notes: &mut Vec<String>) -> Vec<QZeroLambda> {
    let tb = TripleBranches::new(p, t);
    let mut out = Vec::new();
    let (lo, hi) = bx.alpha;
    let gap = 1e-3;
    let mut ranges = Vec::new();
    if hi > gap {
        ranges.push((lo.max(gap), hi));
    }
    if lo < -gap {
        ranges.push((lo, hi.min(-gap)));
    }
    for r in ranges {
        let n = (((r.1 - r.0) * o.q_samples_per_unit).ceil() as usize).max(2);
        match factor_dbeta(p, t, r, n) {
            Ok(Factorization::Quartic(q)) => {
                for &a0 in &q.q_zeros {
                    if let Ok(f) = q.at(a0) {
                        if tb.parallel(a0, f.r2).abs() <= 1e-8 {
                            out.push(QZeroLambda {
                                alpha0: a0,
                                beta0: f.r2,
                                lambda: tb.parallel_dalpha(a0, f.r2),
                            });
                        }
                    }
                }
            }
            Ok(Factorization::Reduced { .. }) => {}
            Err(e) => notes.push(format!("factorization on α ∈ [{}, {}]: {e}", r.0, r.1)),
        }
    }
    out
}

pub fn spacetime_resonances(
    p: &SystemParams,
    t: &PhaseTriple,
    bx: &SearchBox,
    o: &ResonanceOptions,
) -> Result<ResonanceSet> {
    if !(bx.alpha.0 < bx.alpha.1 && bx.beta.0 < bx.beta.1) || o.grid < 3 {
        return Err(Error::Validation("search box must be non-empty with grid >= 3".into()));
    }
    let tb = TripleBranches::new(p, t);
    let (bs, bm, bn) = (p.signed_mass(t.sigma), p.signed_mass(t.mu), p.signed_mass(t.nu));
    let mass_defect = bs - bm - bn;
    let mass_tol = 1e-12 * (bs.abs() + bm.abs() + bn.abs());
    let speeds = [tb.sigma.speed, tb.mu.speed, tb.nu.speed];
    let equal = (speeds[0] - speeds[1]).abs() <= 1e-12 && (speeds[1] - speeds[2]).abs() <= 1e-12;
    let mut set = ResonanceSet {
        kind: ResonanceKind::Empty,
        pairs: vec![],
        rho: None,
        lambda_at_q_zero: vec![],
        unresolved: vec![],
        search_box: *bx,
        options: *o,
        notes: vec![],
    };
    if equal {
        if mass_defect.abs() <= mass_tol {
            set.kind = ResonanceKind::SphereFamily;
            set.rho = Some(bn / bs);
        }
        return Ok(set);
    }

    let n = o.grid;
    let (a0, a1) = bx.alpha;
    let (b0, b1) = bx.beta;
    let ax = |i: usize| a0 + (a1 - a0) * i as f64 / (n - 1) as f64;
    let bxv = |j: usize| b0 + (b1 - b0) * j as f64 / (n - 1) as f64;
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (ax(i), bxv(j));
            vals[i * n + j] = tb.parallel(a, b).abs() + tb.parallel_dbeta(a, b).abs();
        }
    }
    let margin = 0.5 * ((a1 - a0).max(b1 - b0)) / (n - 1) as f64;
    let mut found: Vec<(f64, f64)> = Vec::new();
    if mass_defect.abs() <= mass_tol && bx.contains(0.0, 0.0, 0.0) {
        found.push((0.0, 0.0));
    }
    for i in 0..n {
        for j in 0..n {
            let v = vals[i * n + j];
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if vals[ii as usize * n + jj as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let seed = (ax(i), bxv(j));
            match newton(&tb, seed.0, seed.1, o.residual_tol) {
                Some((a, b)) if bx.contains(a, b, margin) => {
                    if !found
                        .iter()
                        .any(|(x, y)| (x - a).abs().max((y - b).abs()) < o.dedup_radius)
                    {
                        found.push((a, b));
                    }
                }
                Some(_) => {}
                None if v <= o.seed_threshold => {
                    let near_known = found.iter().any(|(x, y)| (x - seed.0).abs().max((y - seed.1).abs()) < 2.0 * margin);
                    if !near_known {
                        set.unresolved.push([seed.0, seed.1]);
                    }
                }
                None => {}
            }
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    // a seed may have failed before a nearby one converged
    set.unresolved.retain(|s| {
        !found
            .iter()
            .any(|(x, y)| (x - s[0]).abs().max((y - s[1]).abs()) < 2.0 * margin)
    });
    set.pairs = found.iter().map(|&(a, b)| annotate(p, t, &tb, a, b)).collect();
    set.lambda_at_q_zero = if (tb.mu.speed - tb.nu.speed).abs() > 1e-12 {
        q_zero_lambdas(p, t, bx, o, &mut set.notes)
    } else {
        vec![]
    };
    set.kind = if mass_defect.abs() <= mass_tol {
        ResonanceKind::DegenerateOrigin
    } else if set.pairs.is_empty() {
        ResonanceKind::Empty
    } else {
        ResonanceKind::Finite
    };
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemBuilder;
    use crate::phase::eval_phase;

    fn setup(b: &[f64], c: &[f64], t: [i32; 3]) -> (SystemParams, PhaseTriple) {
        let p = SystemBuilder::new(b.to_vec(), c.to_vec()).build().unwrap();
        let t = PhaseTriple::new(t[0], t[1], t[2], b.len()).unwrap();
        (p, t)
    }

    #[test]
    fn equal_speed_verdicts() {
        let o = ResonanceOptions::default();
        let (p, t) = setup(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 1, 1]);
        let r = spacetime_resonances(&p, &t, &SearchBox::square(5.0), &o).unwrap();
        assert_eq!(r.kind, ResonanceKind::Empty);
        let (p, t) = setup(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 2, 3]);
        let r = spacetime_resonances(&p, &t, &SearchBox::square(5.0), &o).unwrap();
        assert_eq!(r.kind, ResonanceKind::SphereFamily);
        assert_eq!(r.rho, Some(0.5));
    }

    #[test]
    fn generic_points_are_polished_and_isolated() {
        let (p, t) = setup(&[1.0, 2.0, 0.5], &[1.0, 1.05, 1.0], [1, 2, -3]);
        let r = spacetime_resonances(&p, &t, &SearchBox::square(5.0), &ResonanceOptions::default()).unwrap();
        assert!(r.unresolved.is_empty(), "{:?}", r.unresolved);
        for q in &r.pairs {
            assert!(q.phase_residual <= 1e-10 && q.dbeta_residual <= 1e-10);
            let v = eval_phase(&p, &t, &[q.alpha, 0.0, 0.0], &[q.beta, 0.0, 0.0]);
            assert!(v.abs() <= 1e-10);
        }
        for (i, a) in r.pairs.iter().enumerate() {
            for b in &r.pairs[i + 1..] {
                assert!((a.alpha - b.alpha).abs().max((a.beta - b.beta).abs()) >= 1e-6);
            }
        }
    }

    #[test]
    fn tuned_double_root_reports_lambda() {
        let (p, t, a0) = crate::phase::expansion::tests::tuned(false);
        let bx = SearchBox {
            alpha: (2.0, 3.0),
            beta: (-3.0, 0.0),
        };
        let r = spacetime_resonances(&p, &t, &bx, &ResonanceOptions::default()).unwrap();
        assert_eq!(r.lambda_at_q_zero.len(), 1, "{r:?}");
        assert!((r.lambda_at_q_zero[0].alpha0 - a0).abs() < 1e-9);
        assert!(r.lambda_at_q_zero[0].lambda.abs() > 0.1);
    }

    #[test]
    fn mass_resonant_unequal_speeds_flag_the_origin() {
        let (p, t) = setup(&[2.0, 1.0, 1.0], &[1.0, 1.5, 0.7], [1, 2, 3]);
        let r = spacetime_resonances(&p, &t, &SearchBox::square(2.0), &ResonanceOptions::default()).unwrap();
        assert_eq!(r.kind, ResonanceKind::DegenerateOrigin);
        assert!(r.pairs.iter().any(|q| q.alpha == 0.0 && q.beta == 0.0));
    }
}
