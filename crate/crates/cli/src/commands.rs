use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use kgres::dyadic::{dump, Grid, GridSpec, SpectralField};
use kgres::linear_flow::{decay_fit, run_preset, DecayFit, DecayOptions, DecayPreset, DiagnosticCaps};
use kgres::nonlinear_solver::{diagonalize, evolve, invert, scattering_check, Abort, EvolveOptions, Scheme, SnapshotDiagnostics};
use kgres::params::check_speed_mass_conditions;
use kgres::phase::factor::q_slope;
use kgres::phase::{
    classify_low_freq, factor_dbeta, spacetime_resonances, sublevel_measure, DegenerateReport, Factorization, ResonanceOptions,
    ResonanceSet, SublevelOptions,
};
use kgres::{PhaseTriple, SignedIndex, SystemParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SnapshotMode};
use crate::report::{ensure_dir, to_value, Command, ReportDocument};
use crate::verify::run_suite;
use crate::CliError;

/// How a command that produced a report ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ValidationFailure,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailure => 1,
            Status::NumericalFailure => 2,
        }
    }

    fn of_error(e: &kgres::Error) -> Self {
        if e.is_validation() {
            Status::ValidationFailure
        } else {
            Status::NumericalFailure
        }
    }

    /// The more severe of the two.
    fn worst(self, other: Status) -> Status {
        if self.exit_code() >= other.exit_code() {
            self
        } else {
            other
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: ReportDocument,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QZero {
    pub alpha0: f64,
    /// `Q'(α0)`; nonzero for a simple zero.
    pub q_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSummary {
    Reduced { rho: f64 },
    Quartic { alpha_range: [f64; 2], samples: usize, q_zeros: Vec<QZero> },
    /// The triple admits no factorization of the assumed shape.
    Unavailable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelSample {
    pub eps: f64,
    pub measure: f64,
    /// `measure / ε^{1/3}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub triple: [i32; 3],
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_frequency: Option<DegenerateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorSummary>,
    pub sublevel: Vec<SublevelSample>,
}

fn analyze_triple(cfg: &RunConfig, p: &SystemParams, raw: [i32; 3], out: &mut TripleReport) -> kgres::Result<()> {
    let a = &cfg.analyze;
    let t = PhaseTriple::new(raw[0], raw[1], raw[2], p.dim())?;
    let opts = ResonanceOptions {
        grid: a.resonance_grid,
        ..Default::default()
    };
    out.resonance = Some(spacetime_resonances(p, &t, &a.search_box(), &opts)?);
    out.low_frequency = Some(classify_low_freq(p, &t));
    let range = (a.factor_alpha[0], a.factor_alpha[1]);
    out.factorization = Some(match factor_dbeta(p, &t, range, a.factor_samples) {
        Err(kgres::Error::DegenerateFactorization(reason)) => FactorSummary::Unavailable { reason },
        Err(e) => return Err(e),
        Ok(Factorization::Reduced { rho }) => FactorSummary::Reduced { rho },
        Ok(Factorization::Quartic(q)) => {
            let mut zeros = Vec::with_capacity(q.q_zeros.len());
            for &alpha0 in &q.q_zeros {
                zeros.push(QZero {
                    alpha0,
                    q_slope: q_slope(&q, alpha0)?,
                });
            }
            FactorSummary::Quartic {
                alpha_range: a.factor_alpha,
                samples: a.factor_samples,
                q_zeros: zeros,
            }
        }
    });
    let window = (a.sublevel_window[0], a.sublevel_window[1]);
    for &eps in &a.sublevel_eps {
        let measure = sublevel_measure(p, &t, a.sublevel_alpha, eps, window, &SublevelOptions::default())?;
        out.sublevel.push(SublevelSample {
            eps,
            measure,
            ratio: measure / eps.cbrt(),
        });
    }
    Ok(())
}

/// Resonance analysis of every configured triple; writes `report.json`.
pub fn analyze_command(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, CliError> {
    let (report, status) = analyze_report(cfg)?;
    report.write(out, "report.json")?;
    Ok(CommandOutput { report, status })
}

/// The analyze report without touching the filesystem.
pub fn analyze_report(cfg: &RunConfig) -> Result<(ReportDocument, Status), CliError> {
    let start = Instant::now();
    let p = cfg.system_params()?;
    let conditions = check_speed_mass_conditions(&p);
    let mut status = Status::Ok;
    let mut triples = Vec::with_capacity(cfg.analyze.triples.len());
    for &raw in &cfg.analyze.triples {
        let mut r = TripleReport {
            triple: raw,
            status: Status::Ok,
            error: None,
            resonance: None,
            low_frequency: None,
            factorization: None,
            sublevel: Vec::new(),
        };
        if let Err(e) = analyze_triple(cfg, &p, raw, &mut r) {
            r.status = Status::of_error(&e);
            r.error = Some(e.to_string());
            status = status.worst(r.status);
        }
        triples.push(r);
    }
    let res = ResonanceOptions::default();
    let sub = SublevelOptions::default();
    let mut report = ReportDocument::new(Command::Analyze, cfg, to_value(&triples));
    report.tolerances.insert("conditions".into(), conditions.tolerance);
    report.tolerances.insert("resonance_residual".into(), res.residual_tol);
    report.tolerances.insert("resonance_dedup_radius".into(), res.dedup_radius);
    report.tolerances.insert("sublevel_bisection".into(), sub.tol);
    report.conditions = Some(conditions);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((report, status))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<Abort>,
    /// Time of the last finite snapshot.
    pub last_stable_time: f64,
    pub energy_initial: f64,
    /// `max_t E(t) / E(0)`.
    pub energy_ratio_max: f64,
    pub max_symmetry_drift: f64,
    /// Profile Cauchy defect over the tail, when the tail holds three snapshots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scattering_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_fit: Option<DecayFit>,
    pub diagnostics_csv: String,
    pub snapshot_files: Vec<String>,
    pub snapshots: Vec<SnapshotDiagnostics>,
}

fn gaussian_data(cfg: &RunConfig, grid: &Grid) -> (Vec<SpectralField>, Vec<SpectralField>) {
    let init = &cfg.evolve.initial;
    let w2 = init.width * init.width;
    let shape = SpectralField::from_fn(grid, |x| {
        Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w2)).exp(), 0.0)
    });
    let d = cfg.system.d;
    let u = (1..=d)
        .map(|a| {
            if init.components.is_empty() || init.components.contains(&a) {
                shape.scale(Complex64::new(init.amplitude, 0.0))
            } else {
                SpectralField::zeros(grid)
            }
        })
        .collect();
    (u, vec![SpectralField::zeros(grid); d])
}

fn on_cadence(t: f64, every: f64) -> bool {
    let r = t / every;
    (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
}

/// Pseudo-spectral evolution from Gaussian data; writes `report.json`,
/// `diagnostics.csv` and field dumps under `snapshots/`.
pub fn evolve_command(cfg: &RunConfig, out: &Path) -> Result<CommandOutput, CliError> {
    let start = Instant::now();
    let e = &cfg.evolve;
    let p = cfg.system_params()?;
    let grid = Grid::new(cfg.grid.n, cfg.grid.box_len)?;
    let (u, ut) = gaussian_data(cfg, &grid);
    let initial = diagonalize(&u, &ut, &p)?.dealiased();
    let opts = EvolveOptions {
        t_end: e.t_end,
        dt: e.dt,
        scheme: e.scheme,
        snapshot_every: e.output_dt,
        energy_order: e.energy_order,
        caps: DiagnosticCaps::from(cfg.caps),
        z_samples: e.z_samples.iter().map(|s| (s[0], s[1])).collect(),
        sup_refine: 2,
        blowup_factor: e.blowup_factor,
    };
    let traj = evolve(&initial, &p, &opts)?;
    ensure_dir(out)?;

    let rows: Vec<&SnapshotDiagnostics> = traj.diagnostics.iter().filter(|d| on_cadence(d.t, e.output_dt)).collect();
    let csv_name = "diagnostics.csv";
    write_csv(
        &out.join(csv_name),
        &["t", "E", "L2", "Linf_u", "Linf_du", "cauchy_defect"],
        rows.iter().map(|d| vec![d.t, d.energy, d.l2_norm, d.sup_u, d.sup_du, d.cauchy_defect]),
    )?;

    let mut files = Vec::new();
    let chosen: Vec<usize> = match e.snapshots {
        SnapshotMode::None => Vec::new(),
        SnapshotMode::Final => vec![traj.states.len() - 1],
        SnapshotMode::All => (0..traj.states.len()).collect(),
    };
    let dir = out.join("snapshots");
    for i in chosen {
        let state = &traj.states[i];
        let (fields, _) = invert(state, &p);
        for (a, f) in fields.iter().enumerate() {
            let stem = format!("u{}_t{:08.3}", a + 1, state.t);
            dump::write_field(&dir, &stem, f, a as i32 + 1, &format!("u at t = {}", state.t))?;
            files.push(format!("snapshots/{stem}"));
        }
    }

    let energy0 = traj.diagnostics[0].energy;
    let energy_ratio_max = if energy0 > 0.0 {
        traj.diagnostics.iter().map(|d| d.energy / energy0).fold(f64::NEG_INFINITY, f64::max)
    } else {
        1.0
    };
    let sup_fit = match e.sup_fit_window {
        Some(w) => Some(DecayFit::from_samples(
            traj.diagnostics.iter().map(|d| d.t).collect(),
            traj.diagnostics.iter().map(|d| d.sup_u).collect(),
            (w[0], w[1]),
        )?),
        None => None,
    };
    let last = traj.states.last().map_or(0.0, |s| s.t);
    let summary = EvolveSummary {
        grid: grid.spec(),
        scheme: traj.scheme,
        dt: traj.dt,
        steps: (e.t_end / e.dt).round() as usize,
        t_final: last,
        aborted: traj.aborted.clone(),
        last_stable_time: last,
        energy_initial: energy0,
        energy_ratio_max,
        max_symmetry_drift: traj.max_symmetry_drift(),
        scattering_defect: scattering_check(&traj, e.tail_fraction).ok(),
        sup_fit,
        diagnostics_csv: csv_name.into(),
        snapshot_files: files,
        snapshots: traj.diagnostics.clone(),
    };
    let status = if traj.aborted.is_some() {
        Status::NumericalFailure
    } else {
        Status::Ok
    };
    let mut report = ReportDocument::new(Command::Evolve, cfg, to_value(&summary));
    report.tolerances.insert("blowup_factor".into(), e.blowup_factor);
    report.tolerances.insert("dealias_leak".into(), 1e-13);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    report.write(out, "report.json")?;
    Ok(CommandOutput { report, status })
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Output {
        what: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(fail)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Name of the decay run on the configured grid with the `[decay]` data.
pub const GRID_PRESET: &str = "grid";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDecay {
    pub grid: GridSpec,
    pub width: f64,
    pub fit: DecayFit,
}

/// Decay experiment: a named preset or the `grid` run; writes `decay.csv`
/// and `decay.json`.
pub fn decay_command(cfg: &RunConfig, preset: &str, out: &Path) -> Result<CommandOutput, CliError> {
    let start = Instant::now();
    let p = cfg.system_params()?;
    let sigma = SignedIndex::new(cfg.decay.sigma, p.dim())?;
    let (results, fit) = if preset == GRID_PRESET {
        let grid = Grid::new(cfg.grid.n, cfg.grid.box_len)?;
        let w2 = cfg.decay.width.powi(2);
        let data = SpectralField::from_fn(&grid, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w2)).exp(), 0.0)
        });
        let opts = DecayOptions {
            window: cfg.decay.window.map(|w| (w[0], w[1])),
            ..Default::default()
        };
        let fit = decay_fit(&p, sigma, &data, &cfg.decay.times, cfg.decay.localization(), &opts)?;
        let r = GridDecay {
            grid: grid.spec(),
            width: cfg.decay.width,
            fit: fit.clone(),
        };
        (to_value(&r), fit)
    } else {
        let preset = DecayPreset::from_str(preset).map_err(|e| CliError::Config {
            path: "--preset".into(),
            message: e.to_string(),
        })?;
        let r = run_preset(preset, &p, sigma)?;
        (to_value(&r), r.fit)
    };
    ensure_dir(out)?;
    write_csv(
        &out.join("decay.csv"),
        &["t", "sup_norm"],
        fit.times.iter().zip(&fit.sup_norms).map(|(t, s)| vec![*t, *s]),
    )?;
    let mut report = ReportDocument::new(Command::Decay, cfg, results);
    report.tolerances.insert("slope_ci95".into(), fit.slope_ci);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    report.write(out, "decay.json")?;
    Ok(CommandOutput {
        report,
        status: Status::Ok,
    })
}

/// Runs the invariant suite; nothing is written.
pub fn verify_command(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let start = Instant::now();
    let suite = run_suite(cfg)?;
    let status = if suite.failed == 0 {
        Status::Ok
    } else {
        Status::NumericalFailure
    };
    let mut report = ReportDocument::new(Command::Verify, cfg, to_value(&suite));
    for c in &suite.checks {
        report.tolerances.insert(c.name.clone(), c.tolerance);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(CommandOutput { report, status })
}
