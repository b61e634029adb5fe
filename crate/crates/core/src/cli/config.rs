//! Run configuration.
//!
//! The file is TOML restricted to sections of scalars and arrays. Every
//! frequency is entered in ordinary MHz and every time in µs; conversion to
//! rad/µs happens once, in [`RunConfig::resolve`]. Unknown sections and keys
//! are rejected, as are keys that do not apply to the chosen model.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::circuit::CircuitSpec;
use crate::dynamics::{ReadoutNoise, DEFAULT_TRACE_SAMPLES};
use crate::error::{Error, Result};
use crate::models::{BhzParams, DiamondModel};
use crate::numkit::mhz_to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Diamond,
    Bhz,
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChernSource {
    Analytic,
    Driven,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::ConfigInvalid(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub omega0_mhz: Option<f64>,
    pub hxy_mhz: Option<f64>,
    pub hz_mhz: Option<f64>,
    pub m_mhz: Option<f64>,
    pub bg_mhz: Option<f64>,
    pub omega_q_mhz: Option<[f64; 4]>,
    pub alpha_mhz: Option<[f64; 4]>,
    pub coupling_mhz: Option<[f64; 4]>,
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(default = "default_amplitudes")]
    pub amplitudes_mhz: Vec<f64>,
    #[serde(default = "default_detunings")]
    pub detunings_mhz: Vec<f64>,
    #[serde(default = "default_mu")]
    pub mu: String,
    #[serde(default = "default_nu")]
    pub nu: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub duration_us: Option<f64>,
    #[serde(default = "default_level")]
    pub level: Level,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            amplitudes_mhz: default_amplitudes(),
            detunings_mhz: default_detunings(),
            mu: default_mu(),
            nu: default_nu(),
            samples: default_samples(),
            duration_us: None,
            level: default_level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// `[min, max]` in units of π.
    #[serde(default = "default_theta")]
    pub theta_pi: [f64; 2],
    #[serde(default = "default_theta_count")]
    pub theta_count: usize,
    #[serde(default = "default_phi")]
    pub phi_pi: [f64; 2],
    #[serde(default = "default_one")]
    pub phi_count: usize,
    /// Momenta `2πi/k_count` along each axis.
    #[serde(default = "default_k_count")]
    pub k_count: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            theta_pi: default_theta(),
            theta_count: default_theta_count(),
            phi_pi: default_phi(),
            phi_count: default_one(),
            k_count: default_k_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernSection {
    #[serde(default = "default_source")]
    pub source: ChernSource,
    pub n_theta: Option<usize>,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    #[serde(default = "default_z2_bound")]
    pub z2_bound: f64,
}

impl Default for ChernSection {
    fn default() -> Self {
        Self {
            source: default_source(),
            n_theta: None,
            n_phi: default_n_phi(),
            n_grid: default_n_grid(),
            z2_bound: default_z2_bound(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    #[serde(default = "default_amp_over_freq")]
    pub amp_over_freq: Vec<f64>,
    #[serde(default)]
    pub phase: f64,
    /// 1-based qubit labels; the first one is modulated.
    #[serde(default = "default_pair")]
    pub pair: [usize; 2],
    pub duration_us: Option<f64>,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self { amp_over_freq: default_amp_over_freq(), phase: 0.0, pair: default_pair(), duration_us: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

/// Parsed configuration file, in the units it was written in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub chern: ChernSection,
    #[serde(default)]
    pub circuit: CircuitSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_amplitudes() -> Vec<f64> {
    vec![3.0]
}
fn default_detunings() -> Vec<f64> {
    vec![0.0]
}
fn default_mu() -> String {
    "theta".into()
}
fn default_nu() -> String {
    "phi".into()
}
fn default_samples() -> usize {
    DEFAULT_TRACE_SAMPLES
}
fn default_level() -> Level {
    Level::Upper
}
fn default_theta() -> [f64; 2] {
    [0.1, 0.9]
}
fn default_theta_count() -> usize {
    9
}
fn default_phi() -> [f64; 2] {
    [0.0, 0.0]
}
fn default_one() -> usize {
    1
}
fn default_k_count() -> usize {
    16
}
fn default_source() -> ChernSource {
    ChernSource::Analytic
}
fn default_n_phi() -> usize {
    4
}
fn default_n_grid() -> usize {
    64
}
fn default_z2_bound() -> f64 {
    0.05
}
fn default_amp_over_freq() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 1.5]
}
fn default_pair() -> [usize; 2] {
    [1, 2]
}

/// Model with every frequency in rad/µs.
#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Diamond(DiamondModel),
    Bhz(BhzParams),
    Circuit(CircuitSpec),
}

/// Configuration in internal units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: ResolvedModel,
    pub amplitudes: Vec<f64>,
    pub detunings: Vec<f64>,
    pub duration: Option<f64>,
    pub noise: Option<ReadoutNoise>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub momenta: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::ConfigInvalid(msg) => Error::ConfigInvalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks cross-field constraints and converts to rad/µs.
    pub fn resolve(&self) -> Result<Resolved> {
        let model = self.resolve_model()?;
        let angular = |name: &str, values: &[f64]| -> Result<Vec<f64>> {
            if values.is_empty() {
                return Err(Error::ConfigInvalid(format!("drive.{name} is empty")));
            }
            values
                .iter()
                .map(|&v| {
                    if v.is_finite() {
                        Ok(mhz_to_angular(v))
                    } else {
                        Err(Error::ConfigInvalid(format!("drive.{name} holds a non-finite value")))
                    }
                })
                .collect()
        };
        let amplitudes = angular("amplitudes_mhz", &self.drive.amplitudes_mhz)?;
        let detunings = angular("detunings_mhz", &self.drive.detunings_mhz)?;
        if let Some(d) = self.drive.duration_us {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::ConfigInvalid(format!("drive.duration_us must be positive, got {d}")));
            }
        }
        let noise = if self.noise.sigma == 0.0 {
            None
        } else {
            Some(
                ReadoutNoise::new(self.noise.sigma, self.noise.seed)
                    .map_err(|e| Error::ConfigInvalid(format!("noise: {e}")))?,
            )
        };
        let g = &self.grid;
        let theta = linspace("grid.theta", g.theta_pi, g.theta_count)?;
        let phi = linspace("grid.phi", g.phi_pi, g.phi_count)?;
        if g.k_count == 0 {
            return Err(Error::ConfigInvalid("grid.k_count is zero".into()));
        }
        let momenta = (0..g.k_count).map(|i| 2.0 * PI * i as f64 / g.k_count as f64).collect();
        Ok(Resolved { model, amplitudes, detunings, duration: self.drive.duration_us, noise, theta, phi, momenta })
    }

    fn resolve_model(&self) -> Result<ResolvedModel> {
        let m = &self.model;
        let present = |name: &'static str, set: bool| if set { Some(name) } else { None };
        let keys = [
            present("omega0_mhz", m.omega0_mhz.is_some()),
            present("hxy_mhz", m.hxy_mhz.is_some()),
            present("hz_mhz", m.hz_mhz.is_some()),
            present("m_mhz", m.m_mhz.is_some()),
            present("bg_mhz", m.bg_mhz.is_some()),
            present("omega_q_mhz", m.omega_q_mhz.is_some()),
            present("alpha_mhz", m.alpha_mhz.is_some()),
            present("coupling_mhz", m.coupling_mhz.is_some()),
            present("levels", m.levels.is_some()),
        ];
        let allowed: &[&str] = match m.kind {
            ModelKind::Diamond => &["omega0_mhz"],
            ModelKind::Bhz => &["hxy_mhz", "hz_mhz", "m_mhz", "bg_mhz"],
            ModelKind::Circuit => &["omega_q_mhz", "alpha_mhz", "coupling_mhz", "levels"],
        };
        if let Some(k) = keys.iter().flatten().find(|k| !allowed.contains(k)) {
            return Err(Error::ConfigInvalid(format!("model.{k} does not apply to model kind {:?}", m.kind)));
        }
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::ConfigInvalid(format!("model.{name} is not finite")))
            }
        };
        Ok(match m.kind {
            ModelKind::Diamond => {
                let omega0 = finite("omega0_mhz", m.omega0_mhz.unwrap_or(6.5))?;
                if omega0 <= 0.0 {
                    return Err(Error::ConfigInvalid(format!("model.omega0_mhz must be positive, got {omega0}")));
                }
                ResolvedModel::Diamond(DiamondModel::new(mhz_to_angular(omega0)))
            }
            ModelKind::Bhz => ResolvedModel::Bhz(BhzParams {
                hxy: mhz_to_angular(finite("hxy_mhz", m.hxy_mhz.unwrap_or(1.0))?),
                hz: mhz_to_angular(finite("hz_mhz", m.hz_mhz.unwrap_or(1.0))?),
                m: mhz_to_angular(finite("m_mhz", m.m_mhz.unwrap_or(2.0))?),
                bg: mhz_to_angular(finite("bg_mhz", m.bg_mhz.unwrap_or(0.0))?),
            }),
            ModelKind::Circuit => {
                let base = CircuitSpec::default_device();
                let cs = CircuitSpec {
                    omega_q: m.omega_q_mhz.map_or(base.omega_q, |v| v.map(mhz_to_angular)),
                    alpha: m.alpha_mhz.map_or(base.alpha, |v| v.map(mhz_to_angular)),
                    coupling: m.coupling_mhz.map_or(base.coupling, |v| v.map(mhz_to_angular)),
                    levels: m.levels.unwrap_or(base.levels),
                };
                cs.validate()?;
                ResolvedModel::Circuit(cs)
            }
        })
    }
}

/// `count` evenly spaced values in `π·[min, max]`; a single value sits at `min`.
fn linspace(name: &str, range: [f64; 2], count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::ConfigInvalid(format!("{name} grid is empty")));
    }
    if !range.iter().all(|v| v.is_finite()) {
        return Err(Error::ConfigInvalid(format!("{name} range is not finite")));
    }
    if count == 1 {
        return Ok(vec![range[0] * PI]);
    }
    Ok((0..count).map(|i| PI * (range[0] + (range[1] - range[0]) * i as f64 / (count - 1) as f64)).collect())
}
