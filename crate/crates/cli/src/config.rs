//! JSON run configuration for `evolve`.

use std::path::{Path, PathBuf};

use kerr_core::energy::LedgerOptions;
use kerr_core::evolve::{EvolutionConfig, Launch, Observer};
use kerr_core::geometry::BlendProfile;
use kerr_core::morawetz::epsilon_threshold;
use kerr_core::KerrParams;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub mass: f64,
    pub spin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LaunchSpec {
    TimeSymmetric,
    Ingoing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataSpec {
    /// A exp(-(r* - center)^2 / (2 width^2)) P_l^|m|(cos theta).
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
        l: u32,
        #[serde(default = "default_launch")]
        launch: LaunchSpec,
    },
}

fn default_launch() -> LaunchSpec {
    LaunchSpec::TimeSymmetric
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub cfl: f64,
    pub t_end: f64,
    pub sample_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Family-based energies (third order, K) and their bulk terms.
    #[serde(default = "yes")]
    pub energies: bool,
    #[serde(default = "yes")]
    pub morawetz: bool,
    /// Power of t in the light-cone weighted bulk; omitted to skip it.
    #[serde(default)]
    pub lightcone_p: Option<u32>,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self { energies: true, morawetz: true, lightcone_p: None }
    }
}

/// Everything `evolve` needs. Lengths and times are in units of M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSpec,
    pub mode: i32,
    pub initial_data: InitialDataSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub observers: Vec<ObserverSpec>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    pub output_dir: PathBuf,
    #[serde(default = "default_epsilon")]
    pub morawetz_epsilon: f64,
    /// Widening of the photon band on each side, in M.
    #[serde(default = "default_band_margin")]
    pub band_margin: f64,
}

fn default_epsilon() -> f64 {
    kerr_core::morawetz::DEFAULT_EPSILON
}

fn default_band_margin() -> f64 {
    0.5
}

/// The embedded JSON schema of [`RunConfig`].
pub fn schema_json() -> String {
    serde_json::to_string_pretty(&schemars::schema_for!(RunConfig)).expect("schema serialises")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn kerr_params(&self) -> Result<KerrParams, CliError> {
        Ok(KerrParams::new(self.params.mass, self.params.spin)?)
    }

    /// Cross-field checks, including everything the evolution validates.
    pub fn validate(&self) -> Result<(), CliError> {
        let params = self.kerr_params()?;
        self.evolution_config()?.validate()?;
        let InitialDataSpec::Gaussian { width, l, amplitude, center, .. } = &self.initial_data;
        if (*l as i64) < (self.mode as i64).abs() {
            return Err(CliError::Validation(format!("initial data needs l >= |m|, got l = {l}, m = {}", self.mode)));
        }
        if !(*width > 0.0 && width.is_finite() && amplitude.is_finite() && center.is_finite()) {
            return Err(CliError::Validation("gaussian width must be positive and all values finite".into()));
        }
        let thr = epsilon_threshold(&params);
        if !(self.morawetz_epsilon >= 0.0 && self.morawetz_epsilon < thr) {
            return Err(CliError::Validation(format!("morawetz_epsilon must lie in [0, {thr})")));
        }
        if !(self.band_margin >= 0.0 && self.band_margin.is_finite()) {
            return Err(CliError::Validation("band_margin must be finite and >= 0".into()));
        }
        if let Some(p) = self.diagnostics.lightcone_p {
            if p > 2 {
                return Err(CliError::Validation(format!("lightcone_p must be 0, 1 or 2, got {p}")));
            }
        }
        Ok(())
    }

    /// True when the initial Gaussian (out to 8 widths) cannot reach either
    /// grid edge before `t_end`, so whole-domain integrals stay clean.
    pub fn pulse_stays_inside(&self) -> bool {
        let InitialDataSpec::Gaussian { center, width, .. } = &self.initial_data;
        let reach = self.time.t_end + 8.0 * width;
        center - reach > self.grid.r_star_min && center + reach < self.grid.r_star_max
    }

    pub fn evolution_config(&self) -> Result<EvolutionConfig, CliError> {
        Ok(EvolutionConfig {
            params: self.kerr_params()?,
            m: self.mode,
            r_star_min: self.grid.r_star_min,
            r_star_max: self.grid.r_star_max,
            n_r: self.grid.n_r,
            n_theta: self.grid.n_theta,
            cfl: self.time.cfl,
            t_end: self.time.t_end,
            observers: self.observers.iter().map(|o| Observer { r: o.r, theta: o.theta }).collect(),
            sample_dt: self.time.sample_dt,
        })
    }

    pub fn ledger_options(&self) -> LedgerOptions {
        let m = self.params.mass;
        LedgerOptions {
            blend: BlendProfile::standard(m),
            band_margin: self.band_margin * m,
            morawetz: self.diagnostics.morawetz,
            lightcone_p: self.diagnostics.lightcone_p,
            base_only: !self.diagnostics.energies,
        }
    }

    pub fn launch(&self) -> Launch {
        let InitialDataSpec::Gaussian { launch, .. } = &self.initial_data;
        match launch {
            LaunchSpec::TimeSymmetric => Launch::TimeSymmetric,
            LaunchSpec::Ingoing => Launch::Ingoing,
        }
    }
}
