//! TWDP channel parameterization and scenario validation.
//!
//! A TWDP channel is described physically by the two specular amplitudes
//! `V1 >= V2`, the diffuse power `2σ²` and the total power
//! `Ω = V1² + V2² + 2σ²`. The same channel is more commonly quoted through
//! the power ratio `K = (V1² + V2²) / 2σ²` and the amplitude ratio
//! `Γ = V2 / V1`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Relative tolerance for the `Ω = V1² + V2² + 2σ²` identity.
pub const OMEGA_REL_TOL: f64 = 1e-12;

/// Default number of diffuse sinusoids.
pub const DEFAULT_SINUSOIDS: usize = 8;
/// Default ensemble size.
pub const DEFAULT_TRIALS: usize = 500;
/// Default maximum Doppler frequency in hertz.
pub const DEFAULT_DOPPLER_HZ: f64 = 1000.0;
/// Default normalized sampling period `f_D·T_s`.
pub const DEFAULT_FD_TS: f64 = 0.01;
/// Default samples per trace: 30 Doppler periods at the default sampling.
pub const DEFAULT_SAMPLES: usize = 3000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("K must be finite and non-negative, got {0}")]
    InvalidK(f64),
    #[error("Γ must lie in [0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("Ω must be finite and positive, got {0}")]
    InvalidOmega(f64),
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeComponent { name: &'static str, value: f64 },
    #[error("specular amplitudes must satisfy V2 <= V1 (V1 = {v1}, V2 = {v2})")]
    Ordering { v1: f64, v2: f64 },
    #[error("channel carries no power: V1 and 2σ² are both zero")]
    NoPower,
    #[error("Ω = {omega} does not equal V1² + V2² + 2σ² = {sum}")]
    OmegaMismatch { omega: f64, sum: f64 },
}

/// Physical TWDP parameters. Construction enforces the invariants, so a
/// `ChannelParams` value is always valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ChannelParams {
    v1: f64,
    v2: f64,
    diffuse_power: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    v1: f64,
    v2: f64,
    diffuse_power: f64,
    omega: f64,
}

impl TryFrom<RawParams> for ChannelParams {
    type Error = ParamError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ChannelParams::from_parts(raw.v1, raw.v2, raw.diffuse_power, raw.omega)
    }
}

impl From<ChannelParams> for RawParams {
    fn from(p: ChannelParams) -> Self {
        RawParams {
            v1: p.v1,
            v2: p.v2,
            diffuse_power: p.diffuse_power,
            omega: p.omega,
        }
    }
}

fn check_component(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::NegativeComponent { name, value })
    }
}

impl ChannelParams {
    /// Builds parameters from `(K, Γ, Ω)`.
    pub fn from_k_gamma(k: f64, gamma: f64, omega: f64) -> Result<Self, ParamError> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(ParamError::InvalidK(k));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(ParamError::InvalidGamma(gamma));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ParamError::InvalidOmega(omega));
        }
        let diffuse_power = omega / (1.0 + k);
        let v1 = (omega * k / ((1.0 + k) * (1.0 + gamma * gamma))).sqrt();
        let v2 = gamma * v1;
        Self::from_parts(v1, v2, diffuse_power, omega)
    }

    /// Builds parameters from the physical amplitudes; `Ω` is their power sum.
    pub fn from_amplitudes(v1: f64, v2: f64, diffuse_power: f64) -> Result<Self, ParamError> {
        check_component("V1", v1)?;
        check_component("V2", v2)?;
        check_component("2σ²", diffuse_power)?;
        let omega = v1 * v1 + v2 * v2 + diffuse_power;
        Self::from_parts(v1, v2, diffuse_power, omega)
    }

    /// Builds parameters with an explicit `Ω`, which must match the power sum
    /// to [`OMEGA_REL_TOL`].
    pub fn from_parts(v1: f64, v2: f64, diffuse_power: f64, omega: f64) -> Result<Self, ParamError> {
        check_component("V1", v1)?;
        check_component("V2", v2)?;
        check_component("2σ²", diffuse_power)?;
        if v2 > v1 {
            return Err(ParamError::Ordering { v1, v2 });
        }
        if v1 == 0.0 && diffuse_power == 0.0 {
            return Err(ParamError::NoPower);
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ParamError::InvalidOmega(omega));
        }
        let sum = v1 * v1 + v2 * v2 + diffuse_power;
        if (sum - omega).abs() > OMEGA_REL_TOL * omega {
            return Err(ParamError::OmegaMismatch { omega, sum });
        }
        Ok(ChannelParams {
            v1,
            v2,
            diffuse_power,
            omega,
        })
    }

    /// Pure diffuse channel of power `omega`.
    pub fn rayleigh(omega: f64) -> Result<Self, ParamError> {
        Self::from_k_gamma(0.0, 0.0, omega)
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    /// Diffuse power `2σ²`.
    pub fn diffuse_power(&self) -> f64 {
        self.diffuse_power
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `(K, Γ)` view. `K` is `+∞` for a channel without diffuse power.
    pub fn k_gamma(&self) -> (f64, f64) {
        to_k_gamma(self.v1, self.v2, self.diffuse_power)
            .expect("ordering is enforced at construction")
    }

    pub fn is_rayleigh(&self) -> bool {
        self.v1 == 0.0 && self.v2 == 0.0
    }
}

/// Converts raw amplitudes to `(K, Γ)`.
///
/// `K` is reported as `+∞` when the diffuse power is zero and `Γ` is 0 when
/// both specular amplitudes vanish. `V1 = 0` with `V2 > 0` is rejected.
pub fn to_k_gamma(v1: f64, v2: f64, diffuse_power: f64) -> Result<(f64, f64), ParamError> {
    check_component("V1", v1)?;
    check_component("V2", v2)?;
    check_component("2σ²", diffuse_power)?;
    if v2 > v1 {
        return Err(ParamError::Ordering { v1, v2 });
    }
    let specular = v1 * v1 + v2 * v2;
    let k = if diffuse_power == 0.0 {
        if specular == 0.0 {
            return Err(ParamError::NoPower);
        }
        f64::INFINITY
    } else {
        specular / diffuse_power
    };
    let gamma = if v1 == 0.0 { 0.0 } else { v2 / v1 };
    Ok((k, gamma))
}

/// Doppler phase rate `φ̇ = −2π f_D cos α` of a wave arriving at angle `aoa`.
pub fn phase_rate(aoa: f64, doppler_hz: f64) -> f64 {
    -2.0 * PI * doppler_hz * aoa.cos()
}

/// Reduces an angle to `[−π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut wrapped = angle - two_pi * ((angle + PI) / two_pi).floor();
    if wrapped >= PI {
        wrapped -= two_pi;
    }
    if wrapped < -PI {
        wrapped = -PI;
    }
    wrapped
}

/// One specular wave: amplitude, angle of arrival and Doppler phase rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecularSpec {
    pub amplitude: f64,
    pub aoa: f64,
    pub phase_rate: f64,
}

impl SpecularSpec {
    pub fn new(amplitude: f64, aoa: f64, doppler_hz: f64) -> Self {
        let aoa = wrap_angle(aoa);
        SpecularSpec {
            amplitude,
            aoa,
            phase_rate: phase_rate(aoa, doppler_hz),
        }
    }
}

/// Phase rates `(φ̇1, φ̇2)` of the two specular waves in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRates {
    pub first: f64,
    pub second: f64,
}

impl PhaseRates {
    pub fn from_aoas(aoa1: f64, aoa2: f64, doppler_hz: f64) -> Self {
        PhaseRates {
            first: phase_rate(aoa1, doppler_hz),
            second: phase_rate(aoa2, doppler_hz),
        }
    }
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub params: ChannelParams,
    pub aoa1: f64,
    pub aoa2: f64,
    pub doppler_hz: f64,
    pub sample_period_s: f64,
    pub n_sinusoids: usize,
    pub n_trials: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Standard scenario around the given channel: `α1 = π/4`, `α2 = 2π/3`,
    /// `f_D = 1000 Hz`, `f_D·T_s = 0.01`, `N = 8`, `M = 500`.
    pub fn standard(params: ChannelParams) -> Self {
        ScenarioConfig {
            params,
            aoa1: PI / 4.0,
            aoa2: 2.0 * PI / 3.0,
            doppler_hz: DEFAULT_DOPPLER_HZ,
            sample_period_s: DEFAULT_FD_TS / DEFAULT_DOPPLER_HZ,
            n_sinusoids: DEFAULT_SINUSOIDS,
            n_trials: DEFAULT_TRIALS,
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }

    /// Normalized sampling period `f_D·T_s`.
    pub fn fd_ts(&self) -> f64 {
        self.doppler_hz * self.sample_period_s
    }
}

/// One violated scenario constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioViolation {
    #[error("doppler_hz must be finite and positive, got {0}")]
    NonPositiveDoppler(f64),
    #[error("sample_period_s must be finite and positive, got {0}")]
    NonPositiveSamplePeriod(f64),
    #[error("f_D·T_s = {0} exceeds 0.5; the Doppler process is undersampled")]
    Undersampled(f64),
    #[error("n_sinusoids must be at least 1")]
    NoSinusoids,
    #[error("n_trials must be at least 1")]
    NoTrials,
    #[error("n_samples must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("{0} is not a finite angle")]
    NonFiniteAngle(&'static str),
}

/// The complete list of constraints a scenario violates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioErrors(pub Vec<ScenarioViolation>);

impl std::error::Error for ScenarioErrors {}

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario:")?;
        for v in &self.0 {
            write!(f, " {v};")?;
        }
        Ok(())
    }
}

/// A scenario that passed validation, with angles wrapped and the specular
/// phase rates attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedScenario {
    config: ScenarioConfig,
    specular: [SpecularSpec; 2],
    digest: u64,
}

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn params(&self) -> &ChannelParams {
        &self.config.params
    }

    pub fn specular(&self) -> &[SpecularSpec; 2] {
        &self.specular
    }

    pub fn rates(&self) -> PhaseRates {
        PhaseRates {
            first: self.specular[0].phase_rate,
            second: self.specular[1].phase_rate,
        }
    }

    /// Hash of every field that shapes an individual trace (everything but
    /// the trial count).
    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Same scenario under a different seed.
    pub fn with_seed(&self, seed: u64) -> ValidatedScenario {
        let mut config = self.config.clone();
        config.seed = seed;
        validate_scenario(config).expect("reseeding keeps a scenario valid")
    }

    /// Same scenario with a different ensemble size.
    pub fn with_trials(&self, n_trials: usize) -> Result<ValidatedScenario, ScenarioErrors> {
        let mut config = self.config.clone();
        config.n_trials = n_trials;
        validate_scenario(config)
    }
}

/// Digest over the trace-shaping fields, in trace-header order.
#[allow(clippy::too_many_arguments)]
pub fn scenario_digest(
    params: &ChannelParams,
    aoa1: f64,
    aoa2: f64,
    doppler_hz: f64,
    sample_period_s: f64,
    n_sinusoids: usize,
    seed: u64,
    n_samples: usize,
) -> u64 {
    let mut hasher = Sha256::new();
    for x in [
        params.v1,
        params.v2,
        params.diffuse_power,
        params.omega,
        aoa1,
        aoa2,
        doppler_hz,
        sample_period_s,
    ] {
        hasher.update(x.to_le_bytes());
    }
    hasher.update((n_sinusoids as u64).to_le_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update((n_samples as u64).to_le_bytes());
    let out = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&out[..8]);
    u64::from_le_bytes(head)
}

/// Checks every scenario constraint and returns the normalized scenario or
/// the full list of violations.
pub fn validate_scenario(mut cfg: ScenarioConfig) -> Result<ValidatedScenario, ScenarioErrors> {
    let mut errors = Vec::new();
    let doppler_ok = cfg.doppler_hz.is_finite() && cfg.doppler_hz > 0.0;
    let period_ok = cfg.sample_period_s.is_finite() && cfg.sample_period_s > 0.0;
    if !doppler_ok {
        errors.push(ScenarioViolation::NonPositiveDoppler(cfg.doppler_hz));
    }
    if !period_ok {
        errors.push(ScenarioViolation::NonPositiveSamplePeriod(cfg.sample_period_s));
    }
    if doppler_ok && period_ok && cfg.fd_ts() > 0.5 {
        errors.push(ScenarioViolation::Undersampled(cfg.fd_ts()));
    }
    if cfg.n_sinusoids == 0 {
        errors.push(ScenarioViolation::NoSinusoids);
    }
    if cfg.n_trials == 0 {
        errors.push(ScenarioViolation::NoTrials);
    }
    if cfg.n_samples < 2 {
        errors.push(ScenarioViolation::TooFewSamples(cfg.n_samples));
    }
    if !cfg.aoa1.is_finite() {
        errors.push(ScenarioViolation::NonFiniteAngle("aoa1"));
    }
    if !cfg.aoa2.is_finite() {
        errors.push(ScenarioViolation::NonFiniteAngle("aoa2"));
    }
    if !errors.is_empty() {
        return Err(ScenarioErrors(errors));
    }

    cfg.aoa1 = wrap_angle(cfg.aoa1);
    cfg.aoa2 = wrap_angle(cfg.aoa2);
    let specular = [
        SpecularSpec::new(cfg.params.v1, cfg.aoa1, cfg.doppler_hz),
        SpecularSpec::new(cfg.params.v2, cfg.aoa2, cfg.doppler_hz),
    ];
    let digest = scenario_digest(
        &cfg.params,
        cfg.aoa1,
        cfg.aoa2,
        cfg.doppler_hz,
        cfg.sample_period_s,
        cfg.n_sinusoids,
        cfg.seed,
        cfg.n_samples,
    );
    Ok(ValidatedScenario {
        config: cfg,
        specular,
        digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rayleigh_from_k_zero() {
        let p = ChannelParams::from_k_gamma(0.0, 0.0, 1.0).unwrap();
        assert_eq!(p.v1(), 0.0);
        assert_eq!(p.v2(), 0.0);
        assert_eq!(p.diffuse_power(), 1.0);
        assert!(p.is_rayleigh());
    }

    #[test]
    fn k10_gamma_half() {
        let p = ChannelParams::from_k_gamma(10.0, 0.5, 1.0).unwrap();
        // 2σ² = 1/11, V1² = 10/(11·1.25) = 8/11, V2² = 2/11
        assert!(rel_close(p.diffuse_power(), 1.0 / 11.0, 1e-14));
        assert!(rel_close(p.v1() * p.v1(), 8.0 / 11.0, 1e-14));
        assert!(rel_close(p.v2() * p.v2(), 2.0 / 11.0, 1e-14));
        let (k, g) = p.k_gamma();
        assert!(rel_close(k, 10.0, 1e-12));
        assert!(rel_close(g, 0.5, 1e-12));
    }

    #[test]
    fn equal_tone_limit() {
        let p = ChannelParams::from_k_gamma(1e12, 1.0, 1.0).unwrap();
        assert!(p.diffuse_power() < 1.1e-12);
        assert!(rel_close(p.v1() * p.v1(), 0.5, 1e-9));
        assert!(rel_close(p.v2() * p.v2(), 0.5, 1e-9));
    }

    #[test]
    fn from_k_gamma_rejects_bad_inputs() {
        assert_eq!(
            ChannelParams::from_k_gamma(-1.0, 0.0, 1.0),
            Err(ParamError::InvalidK(-1.0))
        );
        assert!(matches!(
            ChannelParams::from_k_gamma(1.0, 1.5, 1.0),
            Err(ParamError::InvalidGamma(_))
        ));
        assert!(matches!(
            ChannelParams::from_k_gamma(1.0, -0.1, 1.0),
            Err(ParamError::InvalidGamma(_))
        ));
        assert!(matches!(
            ChannelParams::from_k_gamma(1.0, 0.5, 0.0),
            Err(ParamError::InvalidOmega(_))
        ));
        assert!(matches!(
            ChannelParams::from_k_gamma(f64::INFINITY, 0.5, 1.0),
            Err(ParamError::InvalidK(_))
        ));
    }

    #[test]
    fn k_gamma_edge_cases() {
        assert_eq!(to_k_gamma(0.0, 0.0, 1.0).unwrap(), (0.0, 0.0));
        let (k, g) = to_k_gamma(1.0, 0.0, 0.2).unwrap();
        assert!(rel_close(k, 5.0, 1e-14));
        assert_eq!(g, 0.0);
        let (k, g) = to_k_gamma(1.0, 1.0, 0.0).unwrap();
        assert_eq!(k, f64::INFINITY);
        assert_eq!(g, 1.0);
        assert!(matches!(
            to_k_gamma(0.0, 0.3, 1.0),
            Err(ParamError::Ordering { .. })
        ));
    }

    #[test]
    fn amplitudes_enforce_ordering_and_power() {
        assert!(matches!(
            ChannelParams::from_amplitudes(0.2, 0.5, 1.0),
            Err(ParamError::Ordering { .. })
        ));
        assert_eq!(
            ChannelParams::from_amplitudes(0.0, 0.0, 0.0),
            Err(ParamError::NoPower)
        );
        assert!(matches!(
            ChannelParams::from_parts(1.0, 0.0, 0.2, 1.3),
            Err(ParamError::OmegaMismatch { .. })
        ));
        let p = ChannelParams::from_amplitudes(1.0, 0.0, 0.2).unwrap();
        assert!(rel_close(p.omega(), 1.2, 1e-15));
    }

    #[test]
    fn phase_rate_examples() {
        assert!(phase_rate(PI / 2.0, 1000.0).abs() < 1e-9);
        assert!(rel_close(phase_rate(0.0, 1000.0), -2000.0 * PI, 1e-15));
        assert!((phase_rate(PI / 4.0, 1000.0) + 4442.882938158366).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(2.0 * PI / 3.0) - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((wrap_angle(-7.0 * PI / 2.0) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn standard_defaults_validate() {
        let cfg = ScenarioConfig::standard(ChannelParams::from_k_gamma(10.0, 0.5, 1.0).unwrap());
        assert!((cfg.fd_ts() - 0.01).abs() < 1e-15);
        let v = validate_scenario(cfg).unwrap();
        assert_eq!(v.config().n_sinusoids, 8);
        assert_eq!(v.config().n_trials, 500);
        assert!(rel_close(v.rates().first, phase_rate(PI / 4.0, 1000.0), 1e-12));
        assert!(rel_close(
            v.specular()[1].phase_rate,
            -2.0 * PI * 1000.0 * (2.0 * PI / 3.0).cos(),
            1e-12
        ));
    }

    #[test]
    fn undersampled_and_empty_scenarios_rejected() {
        let mut cfg = ScenarioConfig::standard(ChannelParams::rayleigh(1.0).unwrap());
        cfg.sample_period_s = 0.6 / cfg.doppler_hz;
        let err = validate_scenario(cfg.clone()).unwrap_err();
        assert!(matches!(err.0[..], [ScenarioViolation::Undersampled(_)]));

        cfg.sample_period_s = 1e-5;
        cfg.n_trials = 0;
        cfg.n_samples = 1;
        cfg.aoa1 = f64::NAN;
        let err = validate_scenario(cfg).unwrap_err();
        assert_eq!(err.0.len(), 3);
        assert!(err.0.contains(&ScenarioViolation::NoTrials));
        assert!(err.0.contains(&ScenarioViolation::TooFewSamples(1)));
        assert!(err.0.contains(&ScenarioViolation::NonFiniteAngle("aoa1")));
    }

    #[test]
    fn angles_wrapped_on_validation() {
        let mut cfg = ScenarioConfig::standard(ChannelParams::rayleigh(1.0).unwrap());
        cfg.aoa1 = 5.0 * PI / 2.0;
        cfg.aoa2 = PI;
        let v = validate_scenario(cfg).unwrap();
        assert!((v.config().aoa1 - PI / 2.0).abs() < 1e-14);
        assert_eq!(v.config().aoa2, -PI);
    }

    #[test]
    fn digest_ignores_trial_count_only() {
        let cfg = ScenarioConfig::standard(ChannelParams::rayleigh(1.0).unwrap());
        let a = validate_scenario(cfg.clone()).unwrap();
        let b = a.with_trials(3).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), a.with_seed(1).digest());
    }

    #[test]
    fn params_serde_rejects_invalid() {
        let ok = serde_json::to_string(&ChannelParams::from_k_gamma(10.0, 1.0, 1.0).unwrap()).unwrap();
        let back: ChannelParams = serde_json::from_str(&ok).unwrap();
        assert_eq!(back.k_gamma().1, 1.0);
        let bad = r#"{"v1":0.1,"v2":0.5,"diffuse_power":0.74,"omega":1.0}"#;
        assert!(serde_json::from_str::<ChannelParams>(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn k_gamma_round_trip(k in 0.0f64..1e4, gamma in 0.0f64..=1.0, omega in 1e-3f64..1e3) {
            let p = ChannelParams::from_k_gamma(k, gamma, omega).unwrap();
            let (k2, g2) = p.k_gamma();
            prop_assert!(rel_close(k2, k, 1e-12) || (k == 0.0 && k2 == 0.0));
            if k > 0.0 {
                prop_assert!(rel_close(g2, gamma, 1e-12) || (gamma == 0.0 && g2 == 0.0));
            }
            let q = ChannelParams::from_k_gamma(k2, g2, p.omega()).unwrap();
            prop_assert!(rel_close(q.v1(), p.v1(), 1e-12) || p.v1() == 0.0);
            prop_assert!(rel_close(q.v2(), p.v2(), 1e-12) || p.v2() == 0.0);
            prop_assert!(rel_close(q.diffuse_power(), p.diffuse_power(), 1e-12));
        }

        #[test]
        fn powers_non_negative_and_sum_to_omega(k in 0.0f64..1e6, gamma in 0.0f64..=1.0, omega in 1e-6f64..1e6) {
            let p = ChannelParams::from_k_gamma(k, gamma, omega).unwrap();
            prop_assert!(p.v1() >= 0.0 && p.v2() >= 0.0 && p.diffuse_power() >= 0.0);
            prop_assert!(p.v2() <= p.v1());
            let sum = p.v1() * p.v1() + p.v2() * p.v2() + p.diffuse_power();
            prop_assert!(rel_close(sum, omega, 1e-12));
        }

        #[test]
        fn phase_rate_even_and_bounded(aoa in -10.0f64..10.0, fd in 1e-3f64..1e5) {
            let r = phase_rate(aoa, fd);
            prop_assert_eq!(r, phase_rate(-aoa, fd));
            prop_assert!(r.abs() <= 2.0 * PI * fd * (1.0 + 1e-15));
        }

        #[test]
        fn wrapped_angles_in_range(a in -1e4f64..1e4) {
            let w = wrap_angle(a);
            prop_assert!((-PI..PI).contains(&w));
            prop_assert!((w - a).rem_euclid(2.0 * PI).min(2.0 * PI - (w - a).rem_euclid(2.0 * PI)) < 1e-9);
        }
    }
}
