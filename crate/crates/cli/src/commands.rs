//! The four subcommands. Each returns the files it wrote so callers (and
//! tests) can inspect them. Console output goes to the `log` writer.

use std::f64::consts::SQRT_2;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use superint_core::actions::{
    angular_action, dj_r_dl, period_from_radial, period_quadrature, radial_action_quadrature, SeparationConstants,
};
use superint_core::dynamics::{closure_detect, initial_condition, integrate, invariant_drift, radial_period, write_csv};
use superint_core::superconstants::{phase_along, phase_drift, winding};
use superint_core::verify::{
    detuned, suite_abel_consistency, suite_bertrand, suite_isoperiodicity, suite_superintegrability, VerificationReport,
};
use superint_core::{AngularFamily, Error, IntegratorControl, Model};

use crate::config::{ConfigError, Format, ModelConfig};

/// Failure classes, each with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the configuration or the request is invalid.
    Config(ConfigError),
    /// Exit 1: a computation failed.
    Run(String),
    /// Exit 1: at least one verification check failed.
    SuiteFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::SuiteFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Run(msg) => write!(f, "{msg}"),
            CliError::SuiteFailed(names) => write!(f, "verification failed: {}", names.join(", ")),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameters(_) => CliError::Config(ConfigError::general(e.to_string())),
            other => CliError::Run(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Run(format!("cannot write {}: {e}", path.display()))
}

/// Options shared by all commands after flags have overridden the config.
#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub format: Format,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub suites: Option<Vec<String>>,
}

impl Options {
    pub fn from_config(cfg: &ModelConfig) -> Self {
        Options { out: cfg.output.dir.clone(), format: cfg.output.format, grid: None, seed: None, suites: None }
    }

    fn prepare(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|e| io_err(&self.out, e))
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.out.join(format!("{stem}.{ext}"))
    }
}

const FMT: fn(f64) -> String = |v| format!("{v:.16e}");

/// Write a numeric table as CSV (17 significant digits) or as a JSON list of records.
fn write_table(opts: &Options, stem: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
    match opts.format {
        Format::Csv => {
            let path = opts.path(stem, "csv");
            let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
            w.write_record(header).map_err(|e| io_err(&path, e))?;
            for row in rows {
                w.write_record(row.iter().map(|&v| FMT(v))).map_err(|e| io_err(&path, e))?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
            Ok(path)
        }
        Format::Json => {
            let path = opts.path(stem, "json");
            let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|row| header.iter().zip(row).map(|(h, &v)| (h.to_string(), serde_json::json!(v))).collect())
                .collect();
            write_json(&path, &records)?;
            Ok(path)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// `(φ, f̃(φ), c(φ))` across the angular domain and optionally `(r, a^k(r))`.
pub fn tabulate(cfg: &ModelConfig, opts: &Options, log: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model()?;
    let points = opts.grid.unwrap_or(cfg.tabulate.points);
    if points < 2 {
        return Err(ConfigError::field("grid", "need at least 2 points").into());
    }
    opts.prepare()?;
    let mut written = Vec::new();
    if let Some(fam) = model.family() {
        let d = fam.domain();
        let lo = cfg.tabulate.phi_min.unwrap_or(d.phi_tilde);
        let hi = cfg.tabulate.phi_max.unwrap_or(d.phi_end);
        if lo < d.phi_tilde {
            return Err(ConfigError::field("tabulate.phi_min", format!("{lo} lies below the domain start {}", d.phi_tilde)).into());
        }
        if hi > d.phi_end {
            return Err(ConfigError::field("tabulate.phi_max", format!("{hi} lies above the domain end {}", d.phi_end)).into());
        }
        if !(lo < hi) {
            return Err(ConfigError::field("tabulate.phi_max", "must exceed phi_min").into());
        }
        // cell midpoints keep the walls, where c(φ) diverges, out of the table
        let rows: Vec<Vec<f64>> = (0..points)
            .map(|i| {
                let phi = lo + (hi - lo) * (i as f64 + 0.5) / points as f64;
                Ok(vec![phi, fam.ftilde_of_phi(phi)?, fam.value(phi)?])
            })
            .collect::<Result<_, Error>>()?;
        written.push(write_table(opts, "angular_potential", &["phi", "ftilde", "c"], &rows)?);
        writeln!(log, "angular domain ({:.12}, {:.12}), minimum c0 = {} at phi0 = {:.12}", d.phi_tilde, d.phi_end, fam.c0, d.phi0).ok();
    }
    if let Some(r_max) = cfg.tabulate.r_max {
        let limit = model.curvature.chart_limit();
        if !(r_max > 0.0) || r_max >= limit {
            return Err(ConfigError::field("tabulate.r_max", format!("must lie in (0, {limit})")).into());
        }
        let rows: Vec<Vec<f64>> = (1..=points)
            .map(|i| {
                let r = r_max * i as f64 / points as f64;
                Ok(vec![r, model.radial.value(model.curvature, r)?])
            })
            .collect::<Result<_, Error>>()?;
        written.push(write_table(opts, "radial_potential", &["r", "a"], &rows)?);
    }
    if written.is_empty() {
        return Err(ConfigError::field("tabulate.r_max", "a central model has only a radial table; set r_max").into());
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub t_final: f64,
    pub samples: usize,
    pub radial_period: f64,
    pub energy_drift: f64,
    pub l_drift: f64,
    pub phase_drift: Option<f64>,
    pub closure_distance: Option<f64>,
    pub closure_after: Option<u32>,
    /// Why a diagnostic is missing.
    pub notes: Vec<String>,
    pub control: IntegratorControl,
}

/// Integrate one orbit and write it with the invariants and the phase.
pub fn trace(cfg: &ModelConfig, opts: &Options, log: &mut dyn Write) -> Result<(Vec<PathBuf>, TraceSummary), CliError> {
    let model = cfg.model()?;
    let (start, consts) = match cfg.explicit_state() {
        Some(s) => {
            let e = superint_core::dynamics::hamiltonian(&model, &s)?;
            let l = superint_core::dynamics::liouville_l(&model, s.phi, s.p_phi)?;
            (s, SeparationConstants::new(e, l))
        }
        None => {
            let e = cfg.run.energy.ok_or_else(|| ConfigError::field("run.energy", "trace needs energy and l, or run.state"))?;
            let l = cfg.run.l.ok_or_else(|| ConfigError::field("run.l", "trace needs energy and l, or run.state"))?;
            let consts = SeparationConstants::new(e, l);
            (initial_condition(&model, consts, cfg.run.placement.unwrap_or_default())?, consts)
        }
    };
    let t_r = radial_period(&model, &start)?;
    let duration = cfg.run.t_final.unwrap_or(cfg.run.radial_periods * t_r);
    let control = cfg.control().unwrap_or_else(|| IntegratorControl::suggested(&model, consts));
    let traj = integrate(&model, start, duration, control)?;
    let (dh, dl) = invariant_drift(&model, &traj)?;
    let mut notes = Vec::new();
    let phases = match phase_along(&model, &traj, cfg.run.phase_path) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("phase: {e}"));
            None
        }
    };
    let (closure_distance, closure_after) = match winding(&model) {
        Ok((m, _)) => match closure_detect(&model, &traj, m) {
            Ok(rep) => (Some(rep.distance), Some(m)),
            Err(e) => {
                notes.push(format!("closure: {e}"));
                (None, Some(m))
            }
        },
        Err(e) => {
            notes.push(format!("closure: {e}"));
            (None, None)
        }
    };
    let summary = TraceSummary {
        t_final: traj.end().t,
        samples: traj.samples.len(),
        radial_period: t_r,
        energy_drift: dh,
        l_drift: dl,
        phase_drift: phases.as_deref().map(phase_drift),
        closure_distance,
        closure_after,
        notes,
        control,
    };
    opts.prepare()?;
    let phi_col: Option<Vec<f64>> = phases.map(|v| v.iter().map(|p| p.phi).collect());
    let data = match opts.format {
        Format::Csv => {
            let path = opts.path("trajectory", "csv");
            let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_csv(std::io::BufWriter::new(file), &model, &traj, phi_col.as_deref())?;
            path
        }
        Format::Json => {
            let path = opts.path("trajectory", "json");
            let rows: Vec<serde_json::Value> = traj
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    serde_json::json!({
                        "t": s.t, "r": s.r, "phi": s.phi, "p_r": s.p_r, "p_phi": s.p_phi,
                        "Phi": phi_col.as_ref().map(|p| p[i]),
                    })
                })
                .collect();
            write_json(&path, &rows)?;
            path
        }
    };
    let summary_path = opts.path("trace_summary", "json");
    write_json(&summary_path, &summary)?;
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    writeln!(log, "radial period     {:.12}", t_r).ok();
    writeln!(log, "duration          {:.6} ({} samples)", summary.t_final, summary.samples).ok();
    writeln!(log, "energy drift      {dh:.3e}").ok();
    writeln!(log, "l drift           {dl:.3e}").ok();
    writeln!(log, "Phi drift         {}", opt(summary.phase_drift)).ok();
    match summary.closure_after {
        Some(m) => writeln!(log, "closure distance  {} after {m} radial periods", opt(summary.closure_distance)).ok(),
        None => writeln!(log, "closure distance  n/a").ok(),
    };
    for n in &summary.notes {
        writeln!(log, "note: {n}").ok();
    }
    Ok((vec![data, summary_path], summary))
}

/// Actions and periods along an `L` grid at the configured energy.
pub fn scan(cfg: &ModelConfig, opts: &Options, log: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model()?;
    let e = cfg.run.energy.ok_or_else(|| ConfigError::field("run.energy", "scan needs an energy"))?;
    let grid = cfg.l_grid(&cfg.scan.l_values, opts.grid.unwrap_or(cfg.scan.points))?;
    let (m, n) = winding(&model).unwrap_or((0, 0));
    let mut rows = Vec::new();
    for &l in &grid {
        let consts = SeparationConstants::new(e, l);
        let j_r = radial_action_quadrature(&model, consts)?;
        let j_phi = angular_action(&model, l)?;
        let (t_ang, t_rad) = match model.family() {
            Some(f) => (period_quadrature(f, l)?, period_from_radial(f, l).unwrap_or(f64::NAN)),
            None => (f64::NAN, f64::NAN),
        };
        rows.push(vec![l, j_r, j_phi, m as f64 * j_r + n as f64 * j_phi, dj_r_dl(&model, consts)?, t_ang, t_rad]);
    }
    opts.prepare()?;
    let path = write_table(opts, "scan", &["L", "J_r", "J_phi", "combination", "dJr_dL", "period", "period_from_radial"], &rows)?;
    let combos: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let (lo, hi) = combos.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    writeln!(log, "{} L values at E = {e}; {m} J_r + {n} J_phi spans [{lo:.15}, {hi:.15}]", rows.len()).ok();
    Ok(vec![path])
}

fn require_family(model: &Model, suite: &str) -> Result<AngularFamily, CliError> {
    model
        .family()
        .copied()
        .ok_or_else(|| ConfigError::field("angular", format!("suite `{suite}` needs an angular family")).into())
}

/// Run the selected suites; fails with exit code 1 if any check fails.
pub fn verify(cfg: &ModelConfig, opts: &Options, log: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model()?;
    let suites = opts.suites.clone().unwrap_or_else(|| cfg.verify.suites.clone());
    for s in &suites {
        if !crate::config::SUITES.contains(&s.as_str()) {
            return Err(ConfigError::field("suite", format!("unknown suite `{s}`")).into());
        }
    }
    let seed = opts.seed.unwrap_or(cfg.verify.seed);
    let grid_points = opts.grid.unwrap_or(cfg.verify.grid);
    let mut reports: Vec<VerificationReport> = Vec::new();
    for suite in &suites {
        let report = match suite.as_str() {
            "superintegrability" => {
                let e = cfg
                    .run
                    .energy
                    .ok_or_else(|| ConfigError::field("run.energy", "the superintegrability suite needs an energy"))?;
                require_family(&model, suite)?;
                let grid = cfg.l_grid(&cfg.verify.l_values, grid_points)?;
                suite_superintegrability(&model, e, &grid, &detuned(&model)?, seed)?
            }
            "isoperiodicity" => {
                let fam = require_family(&model, suite)?;
                let mut families = vec![fam];
                for &[a, b] in &cfg.verify.partners {
                    if let Ok(p) = (AngularFamily { alpha: a, beta: b, ..fam }).checked() {
                        families.push(p);
                    }
                }
                let control = fam.with_control_nu(fam.nu() * (1.0 + 0.05 * SQRT_2));
                let grid = cfg.l_grid(&cfg.verify.l_values, grid_points)?;
                suite_isoperiodicity(&families, &grid, &control)?
            }
            "abel" => {
                let fam = require_family(&model, suite)?;
                suite_abel_consistency(&fam, &cfg.l_grid(&cfg.verify.l_values, grid_points)?)?
            }
            "bertrand" => suite_bertrand(seed)?,
            _ => unreachable!("suite names are checked above"),
        };
        reports.push(report);
    }
    opts.prepare()?;
    let mut written = Vec::new();
    let mut failed = Vec::new();
    for r in &reports {
        let json = opts.path(&format!("verify_{}", r.suite), "json");
        let mut text = r.to_json();
        text.push('\n');
        fs::write(&json, text).map_err(|e| io_err(&json, e))?;
        let txt = opts.path(&format!("verify_{}", r.suite), "txt");
        fs::write(&txt, r.to_text()).map_err(|e| io_err(&txt, e))?;
        write!(log, "{}", r.to_text()).ok();
        written.extend([json, txt]);
        if !r.pass {
            failed.push(r.suite.clone());
        }
    }
    if failed.is_empty() {
        Ok(written)
    } else {
        Err(CliError::SuiteFailed(failed))
    }
}

