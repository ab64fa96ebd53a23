//! Run configuration: a file layer and a flag layer merged field by field,
//! then resolved into a concrete [`Job`].

use std::fmt;
use std::path::{Path, PathBuf};

use kerrcdo_core::fock::displacement_guard;
use kerrcdo_core::mzi::CdoMode;
use kerrcdo_core::tomography::{dim_for_grid, ShotSettings};
use kerrcdo_core::{Complex64, FockDim, Sign, DEFAULT_THETA};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::state::{parse_sign, sign_symbol, StateSpec};
use crate::value::Cplx;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    CdoFidelity,
    Prepare,
    Cat,
    Chi,
    Wigner,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::CdoFidelity => "cdo-fidelity",
            Scenario::Prepare => "prepare",
            Scenario::Cat => "cat",
            Scenario::Chi => "chi",
            Scenario::Wigner => "wigner",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Ideal,
    Exact,
}

impl From<ModeSpec> for CdoMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Ideal => CdoMode::Ideal,
            ModeSpec::Exact => CdoMode::Exact,
        }
    }
}

/// `+` or `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignSpec(pub Sign);

impl std::str::FromStr for SignSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sign(s.trim()).map(SignSpec).ok_or_else(|| format!("sign must be + or -, got `{s}`"))
    }
}

impl Serialize for SignSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(sign_symbol(self.0))
    }
}

impl<'de> Deserialize<'de> for SignSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A scalar or a list in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Every setting is optional so that layers can be merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<SignSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Largest accepted deviation of the reconstructed Wigner grid from the
    /// displaced-parity oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    /// Smallest accepted fidelity of a prepared state to its target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Settings in `self` win; missing ones come from `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        overlay!(
            self, base, scenario, theta, alpha, beta, alpha0, sign, state, dim_a, mode, grid_b, grid_h, grid_z,
            grid_g, shots, seed, efficiency, out, max_error, min_fidelity
        )
    }

    /// Read a TOML file, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_SCAN_THETAS: [f64; 3] = [0.04, 0.02, 0.01];
pub const DEFAULT_SCAN_BETA: Complex64 = Complex64::new(0.0, -0.5);
pub const DEFAULT_CAT_ALPHA0: f64 = 1.5;
/// Levels added above the displacement guard when `dim_a` is not given.
const DIM_HEADROOM: usize = 12;
const MIN_DEFAULT_DIM: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub b: f64,
    pub h: f64,
    pub z: f64,
    pub g: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { b: 5.0, h: 0.2, z: 3.0, g: 0.1 }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub scenario: Scenario,
    pub thetas: Vec<f64>,
    pub beta: Complex64,
    pub alpha0: Complex64,
    pub sign: Sign,
    pub state: StateSpec,
    pub dim_a: FockDim,
    pub mode: ModeSpec,
    pub grid: Grid,
    pub shots: Option<ShotSettings>,
    pub seed: u64,
    pub out: PathBuf,
    pub max_error: Option<f64>,
    pub min_fidelity: Option<f64>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Job {
    pub fn theta(&self) -> f64 {
        self.thetas[0]
    }

    pub fn resolve(scenario: Scenario, cfg: RunConfig) -> Result<Job, CliError> {
        if let Some(s) = cfg.scenario {
            if s != scenario {
                return Err(config_err(format!("config is for scenario `{s}`, not `{scenario}`")));
            }
        }
        let thetas = match cfg.theta.map(OneOrMany::into_vec) {
            Some(t) if t.is_empty() => return Err(config_err("theta list is empty")),
            Some(t) => t,
            None if scenario == Scenario::CdoFidelity => DEFAULT_SCAN_THETAS.to_vec(),
            None => vec![DEFAULT_THETA],
        };
        if let Some(t) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(config_err(format!("theta = {t} is not finite")));
        }
        if scenario != Scenario::CdoFidelity && thetas.len() != 1 {
            return Err(config_err(format!("{scenario} takes a single theta")));
        }
        if scenario != Scenario::CdoFidelity && thetas[0] == 0.0 {
            return Err(config_err("theta must be nonzero to reach a displacement"));
        }

        let beta = match (cfg.beta, cfg.alpha) {
            (Some(b), Some(a)) => {
                if thetas.len() != 1 {
                    return Err(config_err("alpha together with beta needs a single theta"));
                }
                let implied = Complex64::new(0.0, -thetas[0]) * a.0;
                if (implied - b.0).norm() > 1e-12 {
                    return Err(config_err(format!("beta = {b} is inconsistent with -i theta alpha = {}", Cplx(implied))));
                }
                Some(b.0)
            }
            (Some(b), None) => Some(b.0),
            (None, Some(a)) => {
                if thetas.len() != 1 {
                    return Err(config_err("alpha without beta needs a single theta"));
                }
                Some(Complex64::new(0.0, -thetas[0]) * a.0)
            }
            (None, None) => None,
        };

        let alpha0 = cfg.alpha0.map_or(Complex64::new(DEFAULT_CAT_ALPHA0, 0.0), |a| a.0);
        let sign = cfg.sign.map_or(Sign::Plus, |s| s.0);
        let beta = match scenario {
            Scenario::CdoFidelity => beta.unwrap_or(DEFAULT_SCAN_BETA),
            Scenario::Prepare => beta.ok_or_else(|| config_err("prepare needs --beta or --alpha"))?,
            Scenario::Cat => {
                if beta.is_some() {
                    return Err(config_err("cat derives beta = -2 alpha0; use --alpha0"));
                }
                alpha0 * -2.0
            }
            Scenario::Chi | Scenario::Wigner => {
                if beta.is_some() {
                    return Err(config_err(format!("{scenario} scans its own beta grid; use --grid-b/--grid-h")));
                }
                Complex64::new(0.0, 0.0)
            }
        };

        let state = match scenario {
            Scenario::CdoFidelity => cfg.state.unwrap_or(StateSpec::Fock(1)),
            Scenario::Cat => {
                if cfg.state.is_some() {
                    return Err(config_err("cat prepares from coherent(alpha0); use prepare for other inputs"));
                }
                StateSpec::Coherent(Cplx(alpha0))
            }
            _ => cfg.state.unwrap_or(StateSpec::Vacuum),
        };

        let defaults = Grid::default();
        let grid = Grid {
            b: cfg.grid_b.unwrap_or(defaults.b),
            h: cfg.grid_h.unwrap_or(defaults.h),
            z: cfg.grid_z.unwrap_or(defaults.z),
            g: cfg.grid_g.unwrap_or(defaults.g),
        };
        let is_grid = matches!(scenario, Scenario::Chi | Scenario::Wigner);

        let needed = match scenario {
            Scenario::CdoFidelity => MIN_DEFAULT_DIM.max(state.min_dim()?),
            Scenario::Prepare | Scenario::Cat => MIN_DEFAULT_DIM
                .max(FockDim::for_amplitude(beta.norm()).get() + DIM_HEADROOM)
                .max(state.min_dim()?),
            Scenario::Chi | Scenario::Wigner => dim_for_grid(grid.b).get().max(state.min_dim()?),
        };
        let dim_a = FockDim::new(cfg.dim_a.unwrap_or(needed))?;
        if matches!(scenario, Scenario::Prepare | Scenario::Cat) {
            displacement_guard(beta, dim_a)?;
        }
        if is_grid {
            let corner = Complex64::new(grid.b, grid.b);
            displacement_guard(corner, dim_a)?;
        }

        let seed = cfg.seed.unwrap_or(0);
        let efficiency = cfg.efficiency.unwrap_or(1.0);
        let shots = cfg.shots.map(|shots| ShotSettings { shots, seed, efficiency });
        if let Some(s) = &shots {
            if s.shots == 0 {
                return Err(config_err("shots must be at least 1"));
            }
            if !(efficiency > 0.0 && efficiency <= 1.0) {
                return Err(config_err("efficiency must lie in (0, 1]"));
            }
        }

        Ok(Job {
            scenario,
            thetas,
            beta,
            alpha0,
            sign,
            state,
            dim_a,
            mode: cfg.mode.unwrap_or(ModeSpec::Ideal),
            grid,
            shots,
            seed,
            out: cfg.out.unwrap_or_else(|| PathBuf::from("out")),
            max_error: cfg.max_error,
            min_fidelity: cfg.min_fidelity,
        })
    }

    /// A configuration that reproduces this job when loaded with `--config`.
    pub fn echo(&self) -> RunConfig {
        let is_grid = matches!(self.scenario, Scenario::Chi | Scenario::Wigner);
        let theta = if self.thetas.len() == 1 { OneOrMany::One(self.thetas[0]) } else { OneOrMany::Many(self.thetas.clone()) };
        RunConfig {
            scenario: Some(self.scenario),
            theta: Some(theta),
            alpha: None,
            beta: matches!(self.scenario, Scenario::CdoFidelity | Scenario::Prepare).then_some(Cplx(self.beta)),
            alpha0: (self.scenario == Scenario::Cat).then_some(Cplx(self.alpha0)),
            sign: matches!(self.scenario, Scenario::Prepare | Scenario::Cat).then_some(SignSpec(self.sign)),
            state: (self.scenario != Scenario::Cat).then(|| self.state.clone()),
            dim_a: Some(self.dim_a.get()),
            mode: Some(self.mode),
            grid_b: is_grid.then_some(self.grid.b),
            grid_h: is_grid.then_some(self.grid.h),
            grid_z: (self.scenario == Scenario::Wigner).then_some(self.grid.z),
            grid_g: (self.scenario == Scenario::Wigner).then_some(self.grid.g),
            shots: self.shots.map(|s| s.shots),
            seed: self.shots.map(|s| s.seed),
            efficiency: self.shots.map(|s| s.efficiency),
            out: Some(self.out.clone()),
            max_error: self.max_error,
            min_fidelity: self.min_fidelity,
        }
    }
}
