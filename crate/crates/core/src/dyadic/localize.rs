use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::{admissible, band, shell, spatial_cutoff, PLATEAU, SUPPORT};
use crate::error::{Error, Result};

/// Which localization to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Localization {
    /// `P_k`: frequency shell at `2^k`.
    Frequency { k: i32 },
    /// `Q_{jk}`: `P_k` followed by the spatial cutoff at `2^j`.
    Space { j: i32, k: i32 },
    /// `P_{[k-2,k+2]} Q_{jk}`.
    Star { j: i32, k: i32 },
}

#[derive(Debug, Clone)]
pub struct Localized {
    pub field: SpectralField,
    /// The cutoff reaches past the grid Nyquist frequency or below the grid
    /// spacing, so part of it is not represented.
    pub under_resolved: bool,
}

fn check_frequency(f: &SpectralField, k: i32) -> Result<bool> {
    let g = f.grid();
    let lo = 0.5 * PLATEAU * 2f64.powi(k);
    let hi = SUPPORT * 2f64.powi(k);
    if hi <= g.dk() {
        return Err(Error::OutOfRange(format!(
            "frequency scale 2^{k} is below the lattice spacing {:.3e}; enlarge the box",
            g.dk()
        )));
    }
    if lo >= 3f64.sqrt() * g.nyquist() {
        return Err(Error::OutOfRange(format!(
            "frequency scale 2^{k} is beyond the grid Nyquist frequency {:.3e}; raise the resolution",
            g.nyquist()
        )));
    }
    Ok(hi > g.nyquist())
}

fn check_space(f: &SpectralField, j: i32, k: i32) -> Result<bool> {
    if !admissible(j, k) {
        return Err(Error::Domain(format!(
            "(j, k) = ({j}, {k}) outside the admissible set j >= 0, j + k >= 0"
        )));
    }
    let g = f.grid();
    let inner = if j == (-k).max(0) {
        0.0
    } else {
        0.5 * PLATEAU * 2f64.powi(j)
    };
    if inner >= g.max_radius() {
        return Err(Error::OutOfRange(format!(
            "spatial scale 2^{j} exceeds the box of length {}",
            g.box_len()
        )));
    }
    Ok(SUPPORT * 2f64.powi(j) < g.dx())
}

pub fn localize(f: &SpectralField, loc: Localization) -> Result<Localized> {
    match loc {
        Localization::Frequency { k } => {
            let under = check_frequency(f, k)?;
            Ok(Localized {
                field: f.apply_radial_multiplier(|r| shell(k, r)),
                under_resolved: under,
            })
        }
        Localization::Space { j, k } => {
            let under_s = check_space(f, j, k)?;
            let under_f = check_frequency(f, k)?;
            let pk = f.apply_radial_multiplier(|r| shell(k, r));
            let field = pk.apply_physical(|x| {
                spatial_cutoff(j, k, (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
            });
            Ok(Localized {
                field,
                under_resolved: under_s || under_f,
            })
        }
        Localization::Star { j, k } => {
            let q = localize(f, Localization::Space { j, k })?;
            Ok(Localized {
                field: q.field.apply_radial_multiplier(|r| band(k - 2, k + 2, r)),
                under_resolved: q.under_resolved,
            })
        }
    }
}

/// Largest `j` whose spatial cutoff still meets the box.
pub fn max_spatial_scale(f: &SpectralField) -> i32 {
    let r = f.grid().max_radius();
    let mut j = 0;
    while 0.5 * PLATEAU * 2f64.powi(j + 1) < r {
        j += 1;
    }
    j
}
