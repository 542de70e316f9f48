//! System description: masses, speeds and the quadratic nonlinearity.
//!
//! Components are 0-based in the tensor accessors. Phase indices use the
//! signed 1-based convention of [`SignedIndex`], where a negative index
//! denotes the conjugate half of the diagonalized system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// A signed component label in `±{1..d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedIndex(i32);

impl SignedIndex {
    pub fn new(raw: i32, dim: usize) -> Result<Self> {
        if raw == 0 || raw.unsigned_abs() as usize > dim {
            return Err(Error::Validation(format!(
                "phase index {raw} outside ±{{1..{dim}}}"
            )));
        }
        Ok(SignedIndex(raw))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    /// 0-based component.
    pub fn component(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn sign(self) -> f64 {
        if self.0 > 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn flipped(self) -> Self {
        SignedIndex(-self.0)
    }

    /// All of `±{1..d}`, positive half first.
    pub fn all(dim: usize) -> Vec<SignedIndex> {
        let d = dim as i32;
        (1..=d).chain((1..=d).map(|i| -i)).map(SignedIndex).collect()
    }
}

impl std::fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Output slot, first factor and second factor of a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTriple {
    pub sigma: SignedIndex,
    pub mu: SignedIndex,
    pub nu: SignedIndex,
}

impl PhaseTriple {
    pub fn new(sigma: i32, mu: i32, nu: i32, dim: usize) -> Result<Self> {
        Ok(PhaseTriple {
            sigma: SignedIndex::new(sigma, dim)?,
            mu: SignedIndex::new(mu, dim)?,
            nu: SignedIndex::new(nu, dim)?,
        })
    }

    pub fn negated(self) -> Self {
        PhaseTriple {
            sigma: self.sigma.flipped(),
            mu: self.mu.flipped(),
            nu: self.nu.flipped(),
        }
    }

    pub fn swapped(self) -> Self {
        PhaseTriple {
            sigma: self.sigma,
            mu: self.nu,
            nu: self.mu,
        }
    }

    pub fn as_array(self) -> [i32; 3] {
        [self.sigma.raw(), self.mu.raw(), self.nu.raw()]
    }
}

/// Which derivative of a component enters a semilinear factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Value,
    Time,
    /// Spatial derivative along axis 0, 1 or 2.
    Space(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub component: usize,
    pub slot: Slot,
}

/// One term `coeff * left * right` of the semilinear part of the equation
/// for component `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemilinearTerm {
    pub target: usize,
    pub coeff: f64,
    pub left: Factor,
    pub right: Factor,
}

/// Validated system parameters. Construct with [`SystemBuilder`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    mass: Vec<f64>,
    speed: Vec<f64>,
    /// `A[α][β][γ][j][k]`, flattened row-major.
    quad_u: Vec<f64>,
    /// `B[α][β][γ][j][k][l]`, flattened row-major.
    quad_du: Vec<f64>,
    semilinear: Vec<SemilinearTerm>,
}

impl SystemParams {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speed
    }

    pub fn mass(&self, comp: usize) -> f64 {
        self.mass[comp]
    }

    pub fn speed(&self, comp: usize) -> f64 {
        self.speed[comp]
    }

    /// Mass carrying the sign of the index, so that `b_{-α} = -b_α`.
    pub fn signed_mass(&self, idx: SignedIndex) -> f64 {
        idx.sign() * self.mass[idx.component()]
    }

    pub fn speed_of(&self, idx: SignedIndex) -> f64 {
        self.speed[idx.component()]
    }

    /// Signed dispersion relation `±sqrt(c^2 |ξ|^2 + b^2)` at `|ξ|^2 = norm_sq`.
    pub fn dispersion_sq(&self, idx: SignedIndex, norm_sq: f64) -> f64 {
        let c = self.speed_of(idx);
        let b = self.mass[idx.component()];
        idx.sign() * (c * c * norm_sq + b * b).sqrt()
    }

    pub fn dispersion(&self, idx: SignedIndex, xi: &[f64; 3]) -> f64 {
        self.dispersion_sq(idx, xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])
    }

    pub fn max_speed(&self) -> f64 {
        self.speed.iter().cloned().fold(0.0, f64::max)
    }

    pub fn quad_u(&self, a: usize, b: usize, g: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.quad_u[(((a * d + b) * d + g) * 3 + j) * 3 + k]
    }

    pub fn quad_du(&self, a: usize, b: usize, g: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim();
        self.quad_du[((((a * d + b) * d + g) * 3 + j) * 3 + k) * 3 + l]
    }

    pub fn quad_u_raw(&self) -> &[f64] {
        &self.quad_u
    }

    pub fn quad_du_raw(&self) -> &[f64] {
        &self.quad_du
    }

    pub fn semilinear(&self) -> &[SemilinearTerm] {
        &self.semilinear
    }

    pub fn has_quasilinear(&self) -> bool {
        self.quad_u.iter().chain(&self.quad_du).any(|v| *v != 0.0)
    }

    pub fn is_free(&self) -> bool {
        !self.has_quasilinear() && self.semilinear.iter().all(|t| t.coeff == 0.0)
    }

    /// Copy with the quasilinear coefficient `A` replaced and no validation.
    /// Only for regression experiments that need deliberately broken symmetry.
    pub fn with_quad_u_unchecked(&self, quad_u: Vec<f64>) -> Self {
        assert_eq!(quad_u.len(), self.quad_u.len());
        SystemParams {
            quad_u,
            ..self.clone()
        }
    }
}

/// Builder for [`SystemParams`]. Tensors default to zero.
#[derive(Debug, Clone, Default)]
pub struct SystemBuilder {
    mass: Vec<f64>,
    speed: Vec<f64>,
    quad_u: Option<Vec<f64>>,
    quad_du: Option<Vec<f64>>,
    semilinear: Vec<SemilinearTerm>,
}

impl SystemBuilder {
    pub fn new(mass: Vec<f64>, speed: Vec<f64>) -> Self {
        SystemBuilder {
            mass,
            speed,
            ..Default::default()
        }
    }

    /// Flattened `A[α][β][γ][j][k]`.
    pub fn quad_u(mut self, a: Vec<f64>) -> Self {
        self.quad_u = Some(a);
        self
    }

    /// Flattened `B[α][β][γ][j][k][l]`.
    pub fn quad_du(mut self, b: Vec<f64>) -> Self {
        self.quad_du = Some(b);
        self
    }

    pub fn semilinear(mut self, terms: Vec<SemilinearTerm>) -> Self {
        self.semilinear = terms;
        self
    }

    pub fn build(self) -> Result<SystemParams> {
        let d = self.mass.len();
        if d == 0 {
            return Err(Error::Validation("system needs at least one component".into()));
        }
        if self.speed.len() != d {
            return Err(Error::Validation(format!(
                "c has {} entries but b has {d}",
                self.speed.len()
            )));
        }
        for (i, &b) in self.mass.iter().enumerate() {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Validation(format!(
                    "b[{}] = {b}: mass must be positive",
                    i + 1
                )));
            }
        }
        for (i, &c) in self.speed.iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Validation(format!(
                    "c[{}] = {c}: speed must be positive",
                    i + 1
                )));
            }
        }
        let quad_u = self.quad_u.unwrap_or_else(|| vec![0.0; d * d * d * 9]);
        let quad_du = self.quad_du.unwrap_or_else(|| vec![0.0; d * d * d * 27]);
        if quad_u.len() != d * d * d * 9 {
            return Err(Error::Validation(format!(
                "A has {} entries, expected d^3*9 = {}",
                quad_u.len(),
                d * d * d * 9
            )));
        }
        if quad_du.len() != d * d * d * 27 {
            return Err(Error::Validation(format!(
                "B has {} entries, expected d^3*27 = {}",
                quad_du.len(),
                d * d * d * 27
            )));
        }
        check_tensor("A", &quad_u, d, 9)?;
        check_tensor("B", &quad_du, d, 27)?;
        for (n, t) in self.semilinear.iter().enumerate() {
            for comp in [t.target, t.left.component, t.right.component] {
                if comp >= d {
                    return Err(Error::Validation(format!(
                        "semilinear term {n} refers to component {} but d = {d}",
                        comp + 1
                    )));
                }
            }
            for s in [t.left.slot, t.right.slot] {
                if let Slot::Space(ax) = s {
                    if ax > 2 {
                        return Err(Error::Validation(format!(
                            "semilinear term {n}: spatial axis {ax} out of range"
                        )));
                    }
                }
            }
            if !t.coeff.is_finite() || t.coeff.abs() > 1.0 + TOL {
                return Err(Error::Validation(format!(
                    "semilinear term {n}: coefficient {} exceeds the unit norm bound",
                    t.coeff
                )));
            }
        }
        Ok(SystemParams {
            mass: self.mass,
            speed: self.speed,
            quad_u,
            quad_du,
            semilinear: self.semilinear,
        })
    }
}

/// `block` is the number of entries per `(α, β, γ)`.
fn check_tensor(name: &str, t: &[f64], d: usize, block: usize) -> Result<()> {
    for (i, v) in t.iter().enumerate() {
        if !v.is_finite() || v.abs() > 1.0 + TOL {
            return Err(Error::Validation(format!(
                "{name} entry {i} = {v} exceeds the unit norm bound"
            )));
        }
    }
    for a in 0..d {
        for b in (a + 1)..d {
            for g in 0..d {
                for r in 0..block {
                    let ab = t[((a * d + b) * d + g) * block + r];
                    let ba = t[((b * d + a) * d + g) * block + r];
                    if (ab - ba).abs() > TOL {
                        return Err(Error::Validation(format!(
                            "{name} is not symmetric in its first two component indices: \
                             entry ({}, {}, {}; {r}) = {ab} but swapped = {ba}",
                            a + 1,
                            b + 1,
                            g + 1
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionViolation {
    /// `"speed_mass_ordering"` or `"mass_sum"`.
    pub condition: String,
    /// 1-based components involved.
    pub indices: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `(c_α - c_β)(c_α^2 b_α - c_β^2 b_β) >= 0` for all pairs.
    pub speed_mass_ordering_holds: bool,
    /// `b_α + b_β - b_γ != 0` for all triples.
    pub mass_sum_holds: bool,
    pub violations: Vec<ConditionViolation>,
    /// Signed triples with equal speeds and `b_σ - b_μ - b_ν = 0`.
    pub equal_speed_null_mass_triples: Vec<[i32; 3]>,
    pub tolerance: f64,
}

/// Checks the two structural conditions on masses and speeds under which the
/// single-speed-family theory applies, and lists the triples that carry a
/// sphere of space-time resonances.
pub fn check_speed_mass_conditions(p: &SystemParams) -> ConditionReport {
    let d = p.dim();
    let b = p.masses();
    let c = p.speeds();
    let mut violations = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = (c[i] - c[j]) * (c[i] * c[i] * b[i] - c[j] * c[j] * b[j]);
            if v < -TOL {
                violations.push(ConditionViolation {
                    condition: "speed_mass_ordering".into(),
                    indices: vec![i + 1, j + 1],
                    value: v,
                });
            }
        }
    }
    let ordering = violations.is_empty();
    let mut mass_sum = true;
    for i in 0..d {
        for j in i..d {
            for k in 0..d {
                let v = b[i] + b[j] - b[k];
                if v.abs() <= TOL {
                    mass_sum = false;
                    violations.push(ConditionViolation {
                        condition: "mass_sum".into(),
                        indices: vec![i + 1, j + 1, k + 1],
                        value: v,
                    });
                }
            }
        }
    }
    let all = SignedIndex::all(d);
    let mut triples = Vec::new();
    for &s in &all {
        for &m in &all {
            for &n in &all {
                let cs = p.speed_of(s);
                if (cs - p.speed_of(m)).abs() > TOL || (cs - p.speed_of(n)).abs() > TOL {
                    continue;
                }
                if (p.signed_mass(s) - p.signed_mass(m) - p.signed_mass(n)).abs() <= TOL {
                    triples.push([s.raw(), m.raw(), n.raw()]);
                }
            }
        }
    }
    ConditionReport {
        speed_mass_ordering_holds: ordering,
        mass_sum_holds: mass_sum,
        violations,
        equal_speed_null_mass_triples: triples,
        tolerance: TOL,
    }
}
