//! Littlewood-Paley cutoffs in frequency, space and angle.

pub mod dump;
pub mod field;
pub mod localize;
pub mod spherical;
pub mod zonal;

pub use field::{Grid, GridSpec, SpectralField};
pub use localize::{localize, Localization, Localized};
pub use spherical::{spherical_project, SphericalAnalysis};
pub use zonal::zonal_kernel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plateau edge of the base bump.
pub const PLATEAU: f64 = 1.25;
/// Support edge of the base bump.
pub const SUPPORT: f64 = 1.6;

fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Even smooth bump: 1 on `[-5/4, 5/4]`, 0 outside `[-8/5, 8/5]`, monotone
/// in `|x|` in between.
pub fn bump(x: f64) -> f64 {
    let a = x.abs();
    if a <= PLATEAU {
        1.0
    } else if a >= SUPPORT {
        0.0
    } else {
        let t = (a - PLATEAU) / (SUPPORT - PLATEAU);
        let up = flat(1.0 - t);
        up / (up + flat(t))
    }
}

/// `φ_k(x) = φ(x/2^k) - φ(x/2^{k-1})`.
pub fn shell(k: i32, x: f64) -> f64 {
    bump(x / 2f64.powi(k)) - bump(x / 2f64.powi(k - 1))
}

/// `φ_{≤b}(x) = φ(x/2^b)`.
pub fn up_to(b: i32, x: f64) -> f64 {
    bump(x / 2f64.powi(b))
}

/// `Σ_{lo ≤ m ≤ hi} φ_m(x)`.
pub fn band(lo: i32, hi: i32, x: f64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    bump(x / 2f64.powi(hi)) - bump(x / 2f64.powi(lo - 1))
}

/// True when `(j, k)` lies in the admissible set `j >= 0, k + j >= 0`.
pub fn admissible(j: i32, k: i32) -> bool {
    j >= 0 && k + j >= 0
}

/// Physical-space cutoff paired with frequency scale `k`: a shell at `2^j`
/// except at the smallest admissible `j`, where it is the full ball.
pub fn spatial_cutoff(j: i32, k: i32, x: f64) -> f64 {
    if j == (-k).max(0) {
        up_to(j, x)
    } else {
        shell(j, x)
    }
}

/// Named cutoff, evaluated by [`DyadicShell::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DyadicShell {
    Shell { k: i32 },
    UpTo { b: i32 },
    Band { lo: i32, hi: i32 },
    Localized { j: i32, k: i32 },
}

impl DyadicShell {
    pub fn localized(j: i32, k: i32) -> Result<Self> {
        if !admissible(j, k) {
            return Err(Error::Domain(format!(
                "(j, k) = ({j}, {k}) outside the admissible set j >= 0, j + k >= 0"
            )));
        }
        Ok(DyadicShell::Localized { j, k })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DyadicShell::Shell { k } => shell(k, x),
            DyadicShell::UpTo { b } => up_to(b, x),
            DyadicShell::Band { lo, hi } => band(lo, hi, x),
            DyadicShell::Localized { j, k } => spatial_cutoff(j, k, x),
        }
    }

    /// Closed interval of `|x|` outside which the cutoff vanishes.
    pub fn support(&self) -> (f64, f64) {
        let inner = PLATEAU / 2.0;
        match *self {
            DyadicShell::Shell { k } => (inner * 2f64.powi(k), SUPPORT * 2f64.powi(k)),
            DyadicShell::UpTo { b } => (0.0, SUPPORT * 2f64.powi(b)),
            DyadicShell::Band { lo, hi } => (inner * 2f64.powi(lo), SUPPORT * 2f64.powi(hi)),
            DyadicShell::Localized { j, k } => {
                if j == (-k).max(0) {
                    (0.0, SUPPORT * 2f64.powi(j))
                } else {
                    (inner * 2f64.powi(j), SUPPORT * 2f64.powi(j))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.25), 1.0);
        assert_eq!(bump(-1.6), 0.0);
        assert_eq!(bump(2.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = bump(1.25 + 0.35 * i as f64 / 100.0);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn partition_of_unity_at_one() {
        let s: f64 = (-20..=20).map(|k| shell(k, 1.0)).sum();
        assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn shell_plateau() {
        for k in -3..4 {
            let s = 2f64.powi(k);
            assert_eq!(shell(k, 0.8 * s), 1.0);
            assert_eq!(shell(k, 1.25 * s), 1.0);
            assert_eq!(shell(k, 0.62 * s), 0.0);
            assert_eq!(shell(k, 1.61 * s), 0.0);
        }
    }

    #[test]
    fn localized_outside_admissible_set_is_a_domain_error() {
        assert!(matches!(DyadicShell::localized(-1, 3), Err(Error::Domain(_))));
        assert!(matches!(DyadicShell::localized(1, -3), Err(Error::Domain(_))));
        assert!(DyadicShell::localized(3, -3).is_ok());
    }

    #[test]
    fn spatial_cutoffs_telescope() {
        let k = -2;
        for &x in &[0.0, 0.3, 3.0, 7.7, 40.0] {
            let s: f64 = (2..=8).map(|j| spatial_cutoff(j, k, x)).sum();
            assert!((s - up_to(8, x)).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in 1e-4f64..1e4) {
            let s: f64 = (-20..=20).map(|k| shell(k, x)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn shells_two_apart_are_disjoint(k in -10i32..10, x in 0.0f64..1e4) {
            prop_assert_eq!(shell(k, x) * shell(k + 2, x), 0.0);
        }

        #[test]
        fn band_matches_sum(lo in -5i32..3, w in 0i32..5, x in 0.0f64..100.0) {
            let s: f64 = (lo..=lo + w).map(|m| shell(m, x)).sum();
            prop_assert!((s - band(lo, lo + w, x)).abs() < 1e-13);
        }
    }
}
