//! Small-frequency Taylor model of the phase near `ξ = η = 0`.
//!
//! With signed masses, `Φ ≈ Φ(0,0) + σ10|ξ|² + σ11|ξ-η|² + σ12|η|²
//! + σ20|ξ|⁴ + σ21|ξ-η|⁴ + σ22|η|⁴`. The quartic coefficients carry the
//! sign of the true expansion of `sqrt(c²x² + b²)`, which is negative for
//! a positive branch.

use serde::{Deserialize, Serialize};

use crate::params::{PhaseTriple, SystemParams};

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// Mass-resonant with a perfect-square quadratic and unequal speeds.
    CaseA,
    /// Equal speeds and mass-resonant.
    CaseB,
    Nondegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    /// `[σ10, σ11, σ12, σ20, σ21, σ22]`.
    pub sigma_coeffs: [f64; 6],
    /// `(ρ0, ρ1, ρ3)` in `ρ0|ξ|² + ρ1 ξ·η + ρ3|η|²`.
    pub quad_coeffs: [f64; 3],
    pub perfect_square: bool,
    /// Slope of the critical line `η = ρ5 ξ` of the quadratic model.
    pub rho5: Option<f64>,
    /// Coefficient of `|ξ|⁴` in `Φ(ξ, ρ5 ξ)` when the quadratic vanishes there.
    pub case_a_lambda: Option<f64>,
    pub case_label: CaseLabel,
    /// `|Φ(0, 0)| = |b_σ - b_μ - b_ν|` with signed masses.
    pub phase_at_origin: f64,
    pub tolerance: f64,
}

pub fn classify_low_freq(p: &SystemParams, t: &PhaseTriple) -> DegenerateReport {
    let (bs, bm, bn) = (p.signed_mass(t.sigma), p.signed_mass(t.mu), p.signed_mass(t.nu));
    let (cs, cm, cn) = (p.speed_of(t.sigma), p.speed_of(t.mu), p.speed_of(t.nu));
    let s10 = cs * cs / (2.0 * bs);
    let s11 = -cm * cm / (2.0 * bm);
    let s12 = -cn * cn / (2.0 * bn);
    let s20 = -cs.powi(4) / (8.0 * bs.powi(3));
    let s21 = cm.powi(4) / (8.0 * bm.powi(3));
    let s22 = cn.powi(4) / (8.0 * bn.powi(3));
    let quad = [s10 + s11, -2.0 * s11, s11 + s12];

    let (ps, pm, pn) = (bs / (cs * cs), bm / (cm * cm), bn / (cn * cn));
    let perfect_square = (ps - pm - pn).abs() <= TOL * (ps.abs() + pm.abs() + pn.abs());
    let rho5 = (s11 + s12 != 0.0).then(|| s11 / (s11 + s12));

    let origin = bs - bm - bn;
    let mass_resonant = origin.abs() <= TOL * (bs.abs() + bm.abs() + bn.abs());
    let equal_speeds = (cs - cm).abs() <= TOL && (cm - cn).abs() <= TOL;

    let case_label = if !mass_resonant {
        CaseLabel::Nondegenerate
    } else if equal_speeds {
        CaseLabel::CaseB
    } else if perfect_square {
        CaseLabel::CaseA
    } else {
        CaseLabel::Nondegenerate
    };
    let case_a_lambda = match (case_label, rho5) {
        (CaseLabel::CaseA, Some(r)) => Some(s20 + s21 * (1.0 - r).powi(4) + s22 * r.powi(4)),
        _ => None,
    };
    DegenerateReport {
        sigma_coeffs: [s10, s11, s12, s20, s21, s22],
        quad_coeffs: quad,
        perfect_square,
        rho5,
        case_a_lambda,
        case_label,
        phase_at_origin: origin.abs(),
        tolerance: TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemBuilder;

    fn report(b: &[f64], c: &[f64], t: [i32; 3]) -> DegenerateReport {
        let p = SystemBuilder::new(b.to_vec(), c.to_vec()).build().unwrap();
        classify_low_freq(&p, &PhaseTriple::new(t[0], t[1], t[2], b.len()).unwrap())
    }

    #[test]
    fn unit_branch_coefficients() {
        let r = report(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 2, 3]);
        assert!((r.sigma_coeffs[0] - 0.5).abs() < 1e-15);
        // magnitude c⁴/8b³; a positive branch bends down at fourth order
        assert!((r.sigma_coeffs[3].abs() - 0.125).abs() < 1e-15);
        assert!(r.sigma_coeffs[3] < 0.0);
        assert_eq!(r.case_label, CaseLabel::Nondegenerate);
        assert!((r.phase_at_origin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn taylor_model_matches_the_phase() {
        let p = SystemBuilder::new(vec![1.3, 0.7, 2.1], vec![1.1, 0.6, 1.8]).build().unwrap();
        let t = PhaseTriple::new(1, -2, 3, 3).unwrap();
        let r = classify_low_freq(&p, &t);
        let s = r.sigma_coeffs;
        let origin = super::super::eval_phase(&p, &t, &[0.0; 3], &[0.0; 3]);
        let h = 1e-2;
        let xi = [h, 0.3 * h, 0.0];
        let eta = [-0.5 * h, h, 0.2 * h];
        let n2 = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let d = [xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]];
        let model = origin
            + s[0] * n2(xi)
            + s[1] * n2(d)
            + s[2] * n2(eta)
            + s[3] * n2(xi).powi(2)
            + s[4] * n2(d).powi(2)
            + s[5] * n2(eta).powi(2);
        let exact = super::super::eval_phase(&p, &t, &xi, &eta);
        assert!((model - exact).abs() < 1e-11, "{model} {exact}");
    }

    #[test]
    fn mass_resonant_equal_speeds_is_case_b() {
        let r = report(&[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0], [1, 2, 3]);
        assert!(r.perfect_square);
        assert_eq!(r.case_label, CaseLabel::CaseB);
        assert!((r.rho5.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constructed_case_a_matches_product_formula() {
        // masses chosen so b/c² balances and b_σ = b_μ + b_ν
        for (cs, cm, cn) in [(1.5, 2.0, 1.0), (1.2, 3.0, 0.7), (2.0, 2.5, 1.3)] {
            let bs = 1.0 / (cn * cn) - 1.0 / (cm * cm);
            let bn = 1.0 / (cs * cs) - 1.0 / (cm * cm);
            let bm = 1.0 / (cn * cn) - 1.0 / (cs * cs);
            let r = report(&[bs, bm, bn], &[cs, cm, cn], [1, 2, 3]);
            assert!(r.perfect_square);
            assert_eq!(r.case_label, CaseLabel::CaseA);
            let rho = r.rho5.unwrap();
            let scale = cn * cn - cm * cm;
            assert!((rho - (cs * cs - cm * cm) / scale).abs() < 1e-12);
            let product = (cs * cm * cn).powi(4)
                * (cs * cs - cm * cm)
                * (cm * cm - cn * cn)
                * (cn * cn - cs * cs);
            let lambda = r.case_a_lambda.unwrap();
            assert!(lambda != 0.0);
            assert!((lambda * scale.powi(4) - product / 8.0).abs() < 1e-10 * product.abs());
        }
    }

    #[test]
    fn perfect_square_tracks_the_discriminant() {
        for (b, c) in [
            ([2.0, 1.0, 1.0], [1.0, 1.0, 1.0]),
            ([1.0, 1.0, 1.0], [1.0, 2.0, 1.5]),
            ([3.0, 0.5, 2.5], [1.2, 0.9, 2.0]),
        ] {
            let r = report(&b, &c, [1, 2, 3]);
            let [r0, r1, r3] = r.quad_coeffs;
            let disc = r1 * r1 - 4.0 * r0 * r3;
            assert_eq!(r.perfect_square, disc.abs() < 1e-9, "{disc}");
        }
    }
}
