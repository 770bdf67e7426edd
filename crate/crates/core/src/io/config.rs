//! TOML scenario documents.
//!
//! ```toml
//! k = 10.0          # or v1 / v2 / diffuse_power, never both forms
//! gamma = 1.0
//! omega = 1.0
//! aoa1_rad = 0.785398
//! aoa2_rad = 2.094395
//! doppler_hz = 1000.0
//! fd_ts = 0.01
//! n_sinusoids = 8
//! n_trials = 500
//! n_samples = 3000
//! seed = 0
//! ```
//!
//! Missing keys take the defaults of [`ScenarioConfig::standard`] with
//! a unit-power Rayleigh channel.

use serde::Deserialize;
use thiserror::Error;

use crate::params::{
    validate_scenario, ChannelParams, ParamError, ScenarioConfig, ScenarioErrors, ValidatedScenario,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("ambiguous channel: give either k/gamma/omega or v1/v2/diffuse_power, not both")]
    Ambiguous,
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Scenario(#[from] ScenarioErrors),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    k: Option<f64>,
    gamma: Option<f64>,
    omega: Option<f64>,
    v1: Option<f64>,
    v2: Option<f64>,
    diffuse_power: Option<f64>,
    aoa1_rad: Option<f64>,
    aoa2_rad: Option<f64>,
    doppler_hz: Option<f64>,
    fd_ts: Option<f64>,
    n_sinusoids: Option<usize>,
    n_trials: Option<usize>,
    n_samples: Option<usize>,
    seed: Option<u64>,
}

impl RawConfig {
    fn channel(&self) -> Result<ChannelParams, ConfigError> {
        let k_form = self.k.is_some() || self.gamma.is_some();
        let v_form = self.v1.is_some() || self.v2.is_some() || self.diffuse_power.is_some();
        if k_form && v_form {
            return Err(ConfigError::Ambiguous);
        }
        if v_form {
            let (v1, v2, d) = (
                self.v1.unwrap_or(0.0),
                self.v2.unwrap_or(0.0),
                self.diffuse_power.unwrap_or(0.0),
            );
            return Ok(match self.omega {
                Some(omega) => ChannelParams::from_parts(v1, v2, d, omega)?,
                None => ChannelParams::from_amplitudes(v1, v2, d)?,
            });
        }
        Ok(ChannelParams::from_k_gamma(
            self.k.unwrap_or(0.0),
            self.gamma.unwrap_or(0.0),
            self.omega.unwrap_or(1.0),
        )?)
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ValidatedScenario, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut cfg = ScenarioConfig::standard(raw.channel()?);
    if let Some(a) = raw.aoa1_rad {
        cfg.aoa1 = a;
    }
    if let Some(a) = raw.aoa2_rad {
        cfg.aoa2 = a;
    }
    if let Some(fd) = raw.doppler_hz {
        cfg.doppler_hz = fd;
    }
    let fd_ts = raw.fd_ts.unwrap_or(cfg.fd_ts());
    cfg.sample_period_s = fd_ts / cfg.doppler_hz;
    cfg.n_sinusoids = raw.n_sinusoids.unwrap_or(cfg.n_sinusoids);
    cfg.n_trials = raw.n_trials.unwrap_or(cfg.n_trials);
    cfg.n_samples = raw.n_samples.unwrap_or(cfg.n_samples);
    cfg.seed = raw.seed.unwrap_or(cfg.seed);
    Ok(validate_scenario(cfg)?)
}
