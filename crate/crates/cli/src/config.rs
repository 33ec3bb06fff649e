//! Scenario and particle configuration files.

use std::path::{Path, PathBuf};

use kinetic_continua::analytic::ExampleParams;
use kinetic_continua::particles::{ForceModel, Particle};
use kinetic_continua::solver::{BoundarySpec, SideSpec, SolverConfig, SourceSpec};
use kinetic_continua::{MaterialParams, SymTen2, Ten2, Vec3};
use serde::Deserialize;

use crate::CliError;

/// Reads and parses a TOML file, returning the raw bytes for hashing.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Config(format!("{}: not UTF-8: {e}", path.display())))?;
    let value = toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((value, bytes))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub material: MaterialParams,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub sources: SourceSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "scenario".into()
}

/// Cell counts and domain lengths along `ζ₁` and `ζ₂`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: [usize; 2],
    pub length: [f64; 2],
}

/// Sides default to periodic.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub x_low: SideSpec,
    pub x_high: SideSpec,
    pub y_low: SideSpec,
    pub y_high: SideSpec,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            x_low: SideSpec::PERIODIC,
            x_high: SideSpec::PERIODIC,
            y_low: SideSpec::PERIODIC,
            y_high: SideSpec::PERIODIC,
        }
    }
}

impl From<BoundaryConfig> for BoundarySpec {
    fn from(b: BoundaryConfig) -> Self {
        BoundarySpec {
            x_low: b.x_low,
            x_high: b.x_high,
            y_low: b.y_low,
            y_high: b.y_high,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Uniform fields; `noise` adds seeded uniform noise of that amplitude to `ẋ₁, ẋ₂`.
    Uniform {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        v: Vec3,
        #[serde(default)]
        y: SymTen2,
        #[serde(default)]
        b: Ten2,
        #[serde(default)]
        h: SymTen2,
        #[serde(default)]
        eps: f64,
        #[serde(default)]
        noise: f64,
    },
    /// A closed-form example flow sampled at `tau`.
    Example {
        which: String,
        #[serde(default)]
        params: ExampleParams,
        #[serde(default)]
        tau: f64,
    },
    /// A snapshot CSV, relative paths taken from the config file's directory.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
    /// Trajectory CSV row interval in steps.
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    /// Repeat the run at `dt/2` and report residual ratios.
    #[serde(default)]
    pub dt_halving: bool,
    #[serde(default = "free")]
    pub force: ForceModel,
    pub particles: ParticleSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one_usize() -> usize {
    1
}

fn free() -> ForceModel {
    ForceModel::Free
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParticleSpec {
    /// Seeded random masses, positions in `[-1, 1]³` and velocities in `[-speed, speed]³`.
    Random { count: usize, speed: f64 },
    /// Equal masses on a ring in the 1–2 plane spinning about `c₃`.
    Ring { count: usize, radius: f64, omega: f64 },
    /// Two unit masses at the origin moving at `±speed c₂`.
    CounterStreaming { speed: f64 },
    List { items: Vec<Particle> },
}
