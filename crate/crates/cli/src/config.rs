//! Run configuration: one TOML file per run, versioned by `schema_version`.
//!
//! The file mirrors the domain objects but stays flat enough to edit by hand.
//! Parsing is strict (unknown keys are rejected) and every semantic check
//! names the offending field, so a bad file fails before any computation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use superint_core::verify::default_l_grid;
use superint_core::{
    AngularFamily, AngularPotential, Curvature, IntegratorControl, Model, PhasePath, PhaseState, Placement,
    RadialLink, RadialPotential,
};

/// The schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Problems with the configuration itself; these map to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, when one can be named.
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: Some(field.to_string()), message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        ConfigError { field: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "config field `{field}`: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub schema_version: u32,
    /// Gaussian curvature `k` of the configuration space.
    pub curvature: f64,
    pub radial: RadialConfig,
    pub angular: AngularConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub tabulate: TabulateConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialConfig {
    Oscillator { gamma: f64, omega: f64 },
    /// `f = 0` gives the ordinary Kepler problem.
    Kepler { b: f64, d: f64, f: f64 },
    PowerLaw { coefficient: f64, exponent: f64 },
}

impl RadialConfig {
    pub fn potential(&self) -> RadialPotential {
        match *self {
            RadialConfig::Oscillator { gamma, omega } => RadialPotential::oscillator(gamma, omega),
            RadialConfig::Kepler { b, d, f } => RadialPotential::kepler(b, d, f),
            RadialConfig::PowerLaw { coefficient, exponent } => RadialPotential::PowerLaw { coefficient, exponent },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkConfig {
    Oscillator { gamma: f64 },
    Kepler { b: f64, f: f64 },
}

impl LinkConfig {
    fn link(self) -> RadialLink {
        match self {
            LinkConfig::Oscillator { gamma } => RadialLink::Oscillator { gamma },
            LinkConfig::Kepler { b, f: 0.0 } => RadialLink::Kepler { b },
            LinkConfig::Kepler { b, f } => RadialLink::GeneralizedKepler { b, f },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngularConfig {
    /// `c ≡ 0`.
    Central,
    Family {
        alpha: f64,
        beta: f64,
        m: u32,
        n: u32,
        /// Value of the potential at its minimum. Kepler links may give `j` instead.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        j: Option<f64>,
        /// Replaces `ν` by an arbitrary value (negative controls).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        control_nu: Option<f64>,
        /// Decouples the family from the radial potential (negative controls).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        link: Option<LinkConfig>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Explicit initial state; replaces `energy`, `l` and `placement`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
    /// Duration in units of the radial period; ignored when `t_final` is set.
    #[serde(default = "default_periods")]
    pub radial_periods: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Integrator settings; chosen from the orbit shape when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<IntegratorControl>,
    #[serde(default)]
    pub phase_path: PhasePath,
}

fn default_periods() -> f64 {
    10.0
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            energy: None,
            l: None,
            state: None,
            placement: None,
            radial_periods: default_periods(),
            t_final: None,
            control: None,
            phase_path: PhasePath::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulateConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Sub-interval of the angular domain; the whole domain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_max: Option<f64>,
    /// Also tabulate `a^k(r)` on `(0, r_max]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

fn default_points() -> usize {
    1001
}

impl Default for TabulateConfig {
    fn default() -> Self {
        TabulateConfig { points: default_points(), phi_min: None, phi_max: None, r_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_grid")]
    pub points: usize,
    /// Explicit `L` values; the default log-spaced grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_values: Option<Vec<f64>>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { points: default_grid(), l_values: None }
    }
}

fn default_grid() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_values: Option<Vec<f64>>,
    /// Extra `(α, β)` members for the isoperiodicity suite.
    #[serde(default = "default_partners")]
    pub partners: Vec<[f64; 2]>,
}

pub const SUITES: [&str; 4] = ["superintegrability", "isoperiodicity", "abel", "bertrand"];

fn default_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}

fn default_partners() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [0.3, 0.4], [0.5, -0.5]]
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { suites: default_suites(), seed: 0, grid: default_grid(), l_values: None, partners: default_partners() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), format: Format::default() }
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::field(field, format!("must be finite, got {v}")))
    }
}

impl ModelConfig {
    /// Parse TOML text. Syntax errors carry the line and column from the parser.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| ConfigError::general(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::field(
                "schema_version",
                format!("this build reads version {SCHEMA_VERSION}, found {}", cfg.schema_version),
            ));
        }
        cfg.model()?;
        cfg.check_run()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration types serialize to TOML")
    }

    pub fn curvature(&self) -> Result<Curvature, ConfigError> {
        Curvature::new(self.curvature).map_err(|e| ConfigError::field("curvature", e.to_string()))
    }

    /// The angular family, if the config defines one.
    pub fn family(&self) -> Result<Option<AngularFamily>, ConfigError> {
        let AngularConfig::Family { alpha, beta, m, n, c0, j, control_nu, link } = self.angular else {
            return Ok(None);
        };
        finite("angular.alpha", alpha)?;
        finite("angular.beta", beta)?;
        let link = match link {
            Some(l) => l.link(),
            None => self.radial.potential().link().ok_or_else(|| {
                ConfigError::field("angular", "a power-law radial potential has no linked family; give `angular.link`")
            })?,
        };
        let fam = match (c0, j) {
            (Some(c0), None) => AngularFamily::new(alpha, beta, m, n, finite("angular.c0", c0)?, link),
            (None, Some(j)) => match link {
                RadialLink::Oscillator { .. } => {
                    return Err(ConfigError::field("angular.j", "only Kepler links are parameterized by j; use c0"))
                }
                _ => AngularFamily::with_j(alpha, beta, m, n, finite("angular.j", j)?, link.shift(), link.f()),
            },
            (Some(_), Some(_)) => return Err(ConfigError::field("angular", "give either c0 or j, not both")),
            (None, None) => return Err(ConfigError::field("angular", "missing c0 (or j for Kepler links)")),
        }
        .map_err(|e| ConfigError::field("angular", e.to_string()))?;
        Ok(Some(match control_nu {
            Some(nu) => fam
                .with_control_nu(finite("angular.control_nu", nu)?)
                .checked()
                .map_err(|e| ConfigError::field("angular.control_nu", e.to_string()))?,
            None => fam,
        }))
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        let angular = match self.family()? {
            Some(f) => AngularPotential::Family(f),
            None => AngularPotential::Central,
        };
        self.radial.potential().validate().map_err(|e| ConfigError::field("radial", e.to_string()))?;
        Model::new(self.curvature()?, self.radial.potential(), angular).map_err(|e| ConfigError::field("radial", e.to_string()))
    }

    fn check_run(&self) -> Result<(), ConfigError> {
        let r = &self.run;
        if let Some(e) = r.energy {
            finite("run.energy", e)?;
        }
        if let Some(l) = r.l {
            finite("run.l", l)?;
        }
        if r.state.is_some() && (r.energy.is_some() || r.l.is_some() || r.placement.is_some()) {
            return Err(ConfigError::field("run.state", "an explicit state replaces energy, l and placement"));
        }
        if !(r.radial_periods > 0.0) || !r.radial_periods.is_finite() {
            return Err(ConfigError::field("run.radial_periods", "must be positive"));
        }
        if let Some(t) = r.t_final {
            if !(t > 0.0) || !t.is_finite() {
                return Err(ConfigError::field("run.t_final", "must be positive"));
            }
        }
        for s in &self.verify.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(ConfigError::field("verify.suites", format!("unknown suite `{s}` (known: {})", SUITES.join(", "))));
            }
        }
        if self.tabulate.points < 2 {
            return Err(ConfigError::field("tabulate.points", "need at least 2 points"));
        }
        Ok(())
    }

    /// The explicit state, if given.
    pub fn explicit_state(&self) -> Option<PhaseState> {
        self.run.state.map(|s| PhaseState::new(0.0, s.r, s.phi, s.p_r, s.p_phi))
    }

    /// `L` grid for the scan and verification suites.
    pub fn l_grid(&self, explicit: &Option<Vec<f64>>, points: usize) -> Result<Vec<f64>, ConfigError> {
        if let Some(v) = explicit {
            if v.is_empty() {
                return Err(ConfigError::field("l_values", "empty list"));
            }
            return Ok(v.clone());
        }
        match self.family()? {
            Some(f) => Ok(default_l_grid(&f, points)),
            None => Ok((0..points).map(|i| 0.25 * 2f64.powf(i as f64 * 0.5)).collect()),
        }
    }

    pub fn control(&self) -> Option<IntegratorControl> {
        self.run.control
    }
}
