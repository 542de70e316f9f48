//! The run configuration: a strict TOML document, validated with key paths.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kgres::linear_flow::{DecayLocalization, DiagnosticCaps};
use kgres::nonlinear_solver::Scheme;
use kgres::params::{Factor, SemilinearTerm, Slot};
use kgres::phase::SearchBox;
use kgres::{PhaseTriple, SignedIndex, SystemBuilder, SystemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Longest evolution the CLI accepts.
pub const MAX_T_END: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemDoc,
    #[serde(default)]
    pub grid: GridDoc,
    #[serde(default)]
    pub caps: CapsDoc,
    #[serde(default)]
    pub analyze: AnalyzeDoc,
    #[serde(default)]
    pub evolve: EvolveDoc,
    #[serde(default)]
    pub decay: DecayDoc,
    #[serde(default)]
    pub verify: VerifyDoc,
    /// Used when the command line gives no `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Components are numbered from 1 throughout the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub d: usize,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Nonzero entries of `A[α][β][γ][j][k]`; symmetric partners must be listed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quad_u: Vec<QuadUEntry>,
    /// Nonzero entries of `B[α][β][γ][j][k][l]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quad_du: Vec<QuadDuEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub semilinear: Vec<TermDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadUEntry {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadDuEntry {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub target: usize,
    pub coeff: f64,
    pub left: FactorDoc,
    pub right: FactorDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub component: usize,
    #[serde(default)]
    pub slot: SlotDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotDoc {
    #[default]
    Value,
    Time,
    X1,
    X2,
    X3,
}

impl From<SlotDoc> for Slot {
    fn from(s: SlotDoc) -> Slot {
        match s {
            SlotDoc::Value => Slot::Value,
            SlotDoc::Time => Slot::Time,
            SlotDoc::X1 => Slot::Space(0),
            SlotDoc::X2 => Slot::Space(1),
            SlotDoc::X3 => Slot::Space(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridDoc {
    pub n: usize,
    pub box_len: f64,
}

impl Default for GridDoc {
    fn default() -> Self {
        GridDoc { n: 64, box_len: 64.0 * PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsDoc {
    pub n_sub: u32,
    pub n0_sub: f64,
    pub gamma_order: usize,
    pub k0: i32,
}

impl Default for CapsDoc {
    fn default() -> Self {
        let c = DiagnosticCaps::default();
        CapsDoc {
            n_sub: c.n_sub,
            n0_sub: c.n0_sub,
            gamma_order: c.gamma_order,
            k0: c.k0,
        }
    }
}

impl From<CapsDoc> for DiagnosticCaps {
    fn from(c: CapsDoc) -> Self {
        DiagnosticCaps {
            n_sub: c.n_sub,
            n0_sub: c.n0_sub,
            gamma_order: c.gamma_order,
            k0: c.k0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeDoc {
    /// Signed triples `(σ, μ, ν)`.
    pub triples: Vec<[i32; 3]>,
    pub search_alpha: [f64; 2],
    pub search_beta: [f64; 2],
    pub resonance_grid: usize,
    /// `α` range of the factorization summary; must not contain 0.
    pub factor_alpha: [f64; 2],
    pub factor_samples: usize,
    pub sublevel_alpha: f64,
    pub sublevel_window: [f64; 2],
    pub sublevel_eps: Vec<f64>,
}

impl Default for AnalyzeDoc {
    fn default() -> Self {
        AnalyzeDoc {
            triples: Vec::new(),
            search_alpha: [-5.0, 5.0],
            search_beta: [-5.0, 5.0],
            resonance_grid: 401,
            factor_alpha: [0.2, 4.0],
            factor_samples: 40,
            sublevel_alpha: 0.0,
            sublevel_window: [-3.0, 3.0],
            sublevel_eps: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
        }
    }
}

impl AnalyzeDoc {
    pub fn search_box(&self) -> SearchBox {
        SearchBox {
            alpha: (self.search_alpha[0], self.search_alpha[1]),
            beta: (self.search_beta[0], self.search_beta[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotMode {
    None,
    #[default]
    Final,
    All,
}

/// Gaussian initial data `u_α = amplitude · exp(-|x|²/(2 width²))`,
/// `∂_t u = 0`, on the listed components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialDoc {
    pub amplitude: f64,
    pub width: f64,
    /// Empty means every component.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<usize>,
}

impl Default for InitialDoc {
    fn default() -> Self {
        InitialDoc {
            amplitude: 1e-3,
            width: 4.0,
            components: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveDoc {
    pub t_end: f64,
    pub dt: f64,
    /// Cadence of the diagnostics rows; a whole number of steps.
    pub output_dt: f64,
    pub scheme: Scheme,
    pub energy_order: usize,
    pub initial: InitialDoc,
    pub tail_fraction: f64,
    /// Window of the sup-norm power fit, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_fit_window: Option<[f64; 2]>,
    pub z_samples: Vec<[i32; 2]>,
    pub snapshots: SnapshotMode,
    pub blowup_factor: f64,
}

impl Default for EvolveDoc {
    fn default() -> Self {
        EvolveDoc {
            t_end: 10.0,
            dt: 0.05,
            output_dt: 1.0,
            scheme: Scheme::Rk4Profile,
            energy_order: 0,
            initial: InitialDoc::default(),
            tail_fraction: 0.5,
            sup_fit_window: None,
            z_samples: vec![[0, 0]],
            snapshots: SnapshotMode::Final,
            blowup_factor: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationDoc {
    pub j: i32,
    pub k: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<i32>,
}

/// Parameters of the `grid` decay run; the named presets fix their own data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayDoc {
    pub sigma: i32,
    pub width: f64,
    pub times: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationDoc>,
}

impl Default for DecayDoc {
    fn default() -> Self {
        DecayDoc {
            sigma: 1,
            width: 2.0,
            times: (0..10).map(|i| 5.0 * 10f64.powf(i as f64 / 9.0)).collect(),
            window: None,
            localization: None,
        }
    }
}

impl DecayDoc {
    pub fn localization(&self) -> Option<DecayLocalization> {
        self.localization.map(|l| DecayLocalization { j: l.j, k: l.k, l: l.l })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyDoc {
    pub seed: u64,
    /// Random points per pointwise property.
    pub samples: usize,
}

impl Default for VerifyDoc {
    fn default() -> Self {
        VerifyDoc { seed: 20, samples: 200 }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn check_component(path: String, value: usize, d: usize) -> Result<usize, CliError> {
    if value == 0 || value > d {
        return Err(invalid(path, format!("component {value} outside 1..={d}")));
    }
    Ok(value - 1)
}

fn check_axis(path: String, value: usize) -> Result<usize, CliError> {
    if !(1..=3).contains(&value) {
        return Err(invalid(path, format!("spatial index {value} outside 1..=3")));
    }
    Ok(value - 1)
}

fn check_positive(path: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(path, format!("{v} must be positive and finite")));
    }
    Ok(())
}

fn check_range(path: &str, r: [f64; 2]) -> Result<(), CliError> {
    if !(r[0] < r[1]) || !r.iter().all(|v| v.is_finite()) {
        return Err(invalid(path, format!("[{}, {}] is not an increasing finite range", r[0], r[1])));
    }
    Ok(())
}

impl RunConfig {
    /// The smallest valid document: one unit component.
    pub fn minimal() -> Self {
        RunConfig {
            system: SystemDoc {
                d: 1,
                b: vec![1.0],
                c: vec![1.0],
                quad_u: Vec::new(),
                quad_du: Vec::new(),
                semilinear: Vec::new(),
            },
            grid: GridDoc::default(),
            caps: CapsDoc::default(),
            analyze: AnalyzeDoc::default(),
            evolve: EvolveDoc::default(),
            decay: DecayDoc::default(),
            verify: VerifyDoc::default(),
            output_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| invalid("", e.to_string().trim_end().to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path == "." { String::new() } else { path }, e.into_inner().to_string().trim_end().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the JSON echo stored in a report.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            invalid(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        let d = s.d;
        if d == 0 {
            return Err(invalid("system.d", "need at least one component"));
        }
        if s.b.len() != d {
            return Err(invalid("system.b", format!("has {} entries but d = {d}", s.b.len())));
        }
        if s.c.len() != d {
            return Err(invalid("system.c", format!("has {} entries but d = {d}", s.c.len())));
        }
        self.system_params()?;

        if self.grid.n < 4 || self.grid.n % 2 != 0 {
            return Err(invalid("grid.n", format!("{} must be even and at least 4", self.grid.n)));
        }
        check_positive("grid.box_len", self.grid.box_len)?;
        DiagnosticCaps::from(self.caps)
            .validate()
            .map_err(|e| invalid("caps", e.to_string()))?;

        let a = &self.analyze;
        for (i, t) in a.triples.iter().enumerate() {
            PhaseTriple::new(t[0], t[1], t[2], d).map_err(|e| invalid(format!("analyze.triples[{i}]"), e.to_string()))?;
        }
        check_range("analyze.search_alpha", a.search_alpha)?;
        check_range("analyze.search_beta", a.search_beta)?;
        check_range("analyze.factor_alpha", a.factor_alpha)?;
        check_range("analyze.sublevel_window", a.sublevel_window)?;
        if a.resonance_grid < 3 {
            return Err(invalid("analyze.resonance_grid", "at least 3 points per axis"));
        }
        if a.factor_samples < 2 {
            return Err(invalid("analyze.factor_samples", "at least 2 samples"));
        }
        for (i, e) in a.sublevel_eps.iter().enumerate() {
            check_positive(&format!("analyze.sublevel_eps[{i}]"), *e)?;
        }

        let e = &self.evolve;
        check_positive("evolve.t_end", e.t_end)?;
        if e.t_end > MAX_T_END {
            return Err(invalid("evolve.t_end", format!("{} exceeds the limit {MAX_T_END}", e.t_end)));
        }
        check_positive("evolve.dt", e.dt)?;
        check_positive("evolve.output_dt", e.output_dt)?;
        let whole = |x: f64| (x - x.round()).abs() <= 1e-9 * x.max(1.0) && x.round() >= 1.0;
        if !whole(e.t_end / e.dt) {
            return Err(invalid("evolve.t_end", format!("{} is not a whole number of steps dt = {}", e.t_end, e.dt)));
        }
        if !whole(e.output_dt / e.dt) {
            return Err(invalid("evolve.output_dt", format!("{} is not a whole number of steps dt = {}", e.output_dt, e.dt)));
        }
        if !(e.tail_fraction > 0.0 && e.tail_fraction <= 1.0) {
            return Err(invalid("evolve.tail_fraction", format!("{} outside (0, 1]", e.tail_fraction)));
        }
        if !(e.blowup_factor > 1.0) {
            return Err(invalid("evolve.blowup_factor", "must exceed 1"));
        }
        if let Some(w) = e.sup_fit_window {
            check_range("evolve.sup_fit_window", w)?;
        }
        if !e.initial.amplitude.is_finite() {
            return Err(invalid("evolve.initial.amplitude", "must be finite"));
        }
        check_positive("evolve.initial.width", e.initial.width)?;
        for (i, c) in e.initial.components.iter().enumerate() {
            check_component(format!("evolve.initial.components[{i}]"), *c, d)?;
        }

        let dc = &self.decay;
        SignedIndex::new(dc.sigma, d).map_err(|err| invalid("decay.sigma", err.to_string()))?;
        check_positive("decay.width", dc.width)?;
        if dc.times.is_empty() {
            return Err(invalid("decay.times", "need at least one sample time"));
        }
        for (i, t) in dc.times.iter().enumerate() {
            check_positive(&format!("decay.times[{i}]"), *t)?;
        }
        if dc.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("decay.times", "must be nondecreasing"));
        }
        if let Some(w) = dc.window {
            check_range("decay.window", w)?;
        }
        if self.verify.samples == 0 {
            return Err(invalid("verify.samples", "must be positive"));
        }
        Ok(())
    }

    /// Builds the validated system; errors carry the offending key.
    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let s = &self.system;
        let d = s.d;
        let mut quad_u = vec![0.0; d * d * d * 9];
        for (i, q) in s.quad_u.iter().enumerate() {
            let at = |f: &str| format!("system.quad_u[{i}].{f}");
            let a = check_component(at("alpha"), q.alpha, d)?;
            let b = check_component(at("beta"), q.beta, d)?;
            let g = check_component(at("gamma"), q.gamma, d)?;
            let j = check_axis(at("j"), q.j)?;
            let k = check_axis(at("k"), q.k)?;
            let slot = &mut quad_u[(((a * d + b) * d + g) * 3 + j) * 3 + k];
            if *slot != 0.0 {
                return Err(invalid(format!("system.quad_u[{i}]"), "duplicate entry"));
            }
            *slot = q.value;
        }
        let mut quad_du = vec![0.0; d * d * d * 27];
        for (i, q) in s.quad_du.iter().enumerate() {
            let at = |f: &str| format!("system.quad_du[{i}].{f}");
            let a = check_component(at("alpha"), q.alpha, d)?;
            let b = check_component(at("beta"), q.beta, d)?;
            let g = check_component(at("gamma"), q.gamma, d)?;
            let j = check_axis(at("j"), q.j)?;
            let k = check_axis(at("k"), q.k)?;
            let l = check_axis(at("l"), q.l)?;
            let slot = &mut quad_du[((((a * d + b) * d + g) * 3 + j) * 3 + k) * 3 + l];
            if *slot != 0.0 {
                return Err(invalid(format!("system.quad_du[{i}]"), "duplicate entry"));
            }
            *slot = q.value;
        }
        let mut terms = Vec::with_capacity(s.semilinear.len());
        for (i, t) in s.semilinear.iter().enumerate() {
            let at = |f: &str| format!("system.semilinear[{i}].{f}");
            terms.push(SemilinearTerm {
                target: check_component(at("target"), t.target, d)?,
                coeff: t.coeff,
                left: Factor {
                    component: check_component(at("left.component"), t.left.component, d)?,
                    slot: t.left.slot.into(),
                },
                right: Factor {
                    component: check_component(at("right.component"), t.right.component, d)?,
                    slot: t.right.slot.into(),
                },
            });
        }
        SystemBuilder::new(s.b.clone(), s.c.clone())
            .quad_u(quad_u)
            .quad_du(quad_du)
            .semilinear(terms)
            .build()
            .map_err(|e| {
                let msg = e.to_string();
                let detail = msg.trim_start_matches("validation error: ");
                let key = match detail.split([' ', '[']).next() {
                    Some("A") => "system.quad_u",
                    Some("B") => "system.quad_du",
                    Some("b") => "system.b",
                    Some("c") => "system.c",
                    Some("semilinear") => "system.semilinear",
                    _ => "system",
                };
                invalid(key, detail)
            })
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[system]\nd = 1\nb = [1.0]\nc = [1.0]\n";

    fn path_of(e: CliError) -> String {
        match e {
            CliError::Config { path, .. } => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_document_takes_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg, RunConfig::minimal());
        assert_eq!(cfg.grid.n, 64);
        assert!((cfg.grid.box_len - 64.0 * PI).abs() < 1e-12);
        assert_eq!(cfg.evolve.dt, 0.05);
        let p = cfg.system_params().unwrap();
        assert!(p.is_free());
    }

    #[test]
    fn mass_count_mismatch_names_b() {
        let e = RunConfig::from_toml("[system]\nd = 2\nb = [1.0]\nc = [1.0, 1.0]\n").unwrap_err();
        assert_eq!(path_of(e), "system.b");
    }

    #[test]
    fn unknown_key_is_listed() {
        let e = RunConfig::from_toml(&format!("{MINIMAL}spped = 3\n")).unwrap_err();
        assert!(e.to_string().contains("spped"), "{e}");
        let e = RunConfig::from_toml(&format!("{MINIMAL}[grid]\nresolution = 32\n")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("resolution") && msg.contains("grid"), "{msg}");
    }

    #[test]
    fn type_mismatch_has_a_key_path() {
        let e = RunConfig::from_toml(&format!("{MINIMAL}[evolve]\ndt = \"small\"\n")).unwrap_err();
        assert_eq!(path_of(e), "evolve.dt");
    }

    #[test]
    fn index_out_of_range_names_the_key() {
        let doc = format!("{MINIMAL}[[system.semilinear]]\ntarget = 1\ncoeff = 1.0\nleft = {{ component = 1 }}\nright = {{ component = 2 }}\n");
        assert_eq!(path_of(RunConfig::from_toml(&doc).unwrap_err()), "system.semilinear[0].right.component");
        let doc = format!("{MINIMAL}[analyze]\ntriples = [[1, 1, 2]]\n");
        assert_eq!(path_of(RunConfig::from_toml(&doc).unwrap_err()), "analyze.triples[0]");
        let doc = format!("{MINIMAL}[[system.quad_u]]\nalpha = 1\nbeta = 1\ngamma = 1\nj = 4\nk = 1\nvalue = 0.1\n");
        assert_eq!(path_of(RunConfig::from_toml(&doc).unwrap_err()), "system.quad_u[0].j");
    }

    #[test]
    fn asymmetric_tensor_is_rejected() {
        let doc = "[system]\nd = 2\nb = [2.0, 1.0]\nc = [1.0, 1.0]\n\
                   [[system.quad_u]]\nalpha = 1\nbeta = 2\ngamma = 1\nj = 1\nk = 1\nvalue = 0.5\n";
        let e = RunConfig::from_toml(doc).unwrap_err();
        assert!(e.to_string().contains("symmetric"), "{e}");
        assert_eq!(path_of(e), "system.quad_u");
        let e = RunConfig::from_toml("[system]\nd = 2\nb = [1.0, -1.0]\nc = [1.0, 1.0]\n").unwrap_err();
        assert!(e.to_string().contains("mass must be positive"), "{e}");
        assert_eq!(path_of(e), "system.b");
    }

    #[test]
    fn missing_mandatory_key() {
        let e = RunConfig::from_toml("[system]\nd = 1\nb = [1.0]\n").unwrap_err();
        assert!(e.to_string().contains("c"), "{e}");
    }

    #[test]
    fn evolve_limits() {
        let doc = format!("{MINIMAL}[evolve]\nt_end = 250.0\n");
        assert_eq!(path_of(RunConfig::from_toml(&doc).unwrap_err()), "evolve.t_end");
        let doc = format!("{MINIMAL}[evolve]\noutput_dt = 0.07\n");
        assert_eq!(path_of(RunConfig::from_toml(&doc).unwrap_err()), "evolve.output_dt");
    }

    #[test]
    fn toml_round_trip() {
        let doc = "[system]\nd = 2\nb = [2.0, 1.0]\nc = [1.0, 1.5]\n\
                   [[system.semilinear]]\ntarget = 2\ncoeff = -0.5\nleft = { component = 1, slot = \"x2\" }\nright = { component = 2, slot = \"time\" }\n\
                   [analyze]\ntriples = [[1, 2, -2]]\n[decay]\nlocalization = { j = 2, k = 0 }\n";
        let cfg = RunConfig::from_toml(doc).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&json).unwrap(), cfg);
    }
}
