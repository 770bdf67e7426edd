//! Sum-of-sinusoids TWDP trace generation.
//!
//! Each trial draws two specular initial phases and, for the diffuse part,
//! `N` pairs `(ϑ_i, φ_i)` i.i.d. uniform on `[−π, π)`. The diffuse angles of
//! arrival are `β_i = (2πi + ϑ_i)/N`, one per equal-width sector of the
//! circle. Randomness comes from a ChaCha stream keyed by the seed and
//! selected by the trial index, so every trial is reproducible on its own.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::params::{wrap_angle, ValidatedScenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SosError {
    #[error("trace {trial} has {got} samples, scenario declares {expected}")]
    LengthMismatch {
        trial: usize,
        expected: usize,
        got: usize,
    },
    #[error("trace {trial} has a non-finite sample at index {index}")]
    NonFinite { trial: usize, index: usize },
    #[error("trace {trial} was generated for a different scenario")]
    DigestMismatch { trial: usize },
    #[error("trace at position {position} has trial index {trial}")]
    TrialIndexGap { position: usize, trial: usize },
    #[error("ensemble holds no traces")]
    Empty,
}

/// Random angles of the diffuse component for one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseRealization {
    thetas: Vec<f64>,
    init_phases: Vec<f64>,
    aoas: Vec<f64>,
    #[serde(skip)]
    cos_aoas: Vec<f64>,
}

impl DiffuseRealization {
    /// Builds the realization from per-path `ϑ_i` and `φ_i`; `β_i` is derived
    /// with the 1-based path index.
    pub fn new(thetas: Vec<f64>, init_phases: Vec<f64>) -> Self {
        assert_eq!(
            thetas.len(),
            init_phases.len(),
            "one initial phase per diffuse path"
        );
        assert!(!thetas.is_empty(), "at least one diffuse path");
        let thetas: Vec<f64> = thetas.into_iter().map(wrap_angle).collect();
        let init_phases: Vec<f64> = init_phases.into_iter().map(wrap_angle).collect();
        let n = thetas.len() as f64;
        let raw_aoas: Vec<f64> = thetas
            .iter()
            .enumerate()
            .map(|(i, theta)| (2.0 * PI * (i + 1) as f64 + theta) / n)
            .collect();
        let cos_aoas = raw_aoas.iter().map(|b| b.cos()).collect();
        let aoas = raw_aoas.into_iter().map(wrap_angle).collect();
        DiffuseRealization {
            thetas,
            init_phases,
            aoas,
            cos_aoas,
        }
    }

    pub fn n_sinusoids(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn init_phases(&self) -> &[f64] {
        &self.init_phases
    }

    /// Angles of arrival `β_i`, wrapped to `[−π, π)`.
    pub fn aoas(&self) -> &[f64] {
        &self.aoas
    }
}

/// Random draws of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRandoms {
    pub specular_phases: [f64; 2],
    pub diffuse: DiffuseRealization,
}

fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    wrap_angle(-PI + 2.0 * PI * u)
}

/// Draws `φ1, φ2` and the diffuse realization for `(seed, trial_index)`.
///
/// Draw order within the substream: `φ1`, `φ2`, then `ϑ_1..ϑ_N`, then
/// `φ_1..φ_N`.
pub fn draw_trial_randoms(seed: u64, trial_index: u64, n_sinusoids: usize) -> TrialRandoms {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    let specular_phases = [uniform_angle(&mut rng), uniform_angle(&mut rng)];
    let thetas = (0..n_sinusoids).map(|_| uniform_angle(&mut rng)).collect();
    let init_phases = (0..n_sinusoids).map(|_| uniform_angle(&mut rng)).collect();
    TrialRandoms {
        specular_phases,
        diffuse: DiffuseRealization::new(thetas, init_phases),
    }
}

/// `amplitude·exp(j(init_phase + phase_rate·n·T_s))` for `n = 0..n_samples`.
pub fn specular_tone(
    amplitude: f64,
    init_phase: f64,
    phase_rate: f64,
    sample_period_s: f64,
    n_samples: usize,
) -> Vec<Complex64> {
    (0..n_samples)
        .map(|n| {
            let t = n as f64 * sample_period_s;
            Complex64::from_polar(amplitude, init_phase + phase_rate * t)
        })
        .collect()
}

/// Diffuse component `√(2σ²/N)·Σ exp(j(2π f_D t cos β_i + φ_i))` at time `t`.
pub fn diffuse_sample(
    realization: &DiffuseRealization,
    diffuse_power: f64,
    doppler_hz: f64,
    t: f64,
) -> Complex64 {
    if diffuse_power == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = realization.n_sinusoids() as f64;
    let omega_d = 2.0 * PI * doppler_hz * t;
    let sum: Complex64 = realization
        .cos_aoas
        .iter()
        .zip(&realization.init_phases)
        .map(|(c, phi)| {
            let (s, c) = (omega_d * c + phi).sin_cos();
            Complex64::new(c, s)
        })
        .sum();
    sum * (diffuse_power / n).sqrt()
}

/// One trial's complex lowpass samples and where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingTrace {
    pub samples: Vec<Complex64>,
    pub sample_period_s: f64,
    pub scenario_digest: u64,
    pub trial_index: usize,
    pub seed: u64,
}

impl FadingTrace {
    /// Wraps externally produced samples as a trace of `scenario`.
    pub fn synthetic(
        scenario: &ValidatedScenario,
        trial_index: usize,
        samples: Vec<Complex64>,
    ) -> FadingTrace {
        FadingTrace {
            samples,
            sample_period_s: scenario.config().sample_period_s,
            scenario_digest: scenario.digest(),
            trial_index,
            seed: scenario.config().seed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Samples of trial `trial_index` at the given sample indices. Every sample
/// is evaluated independently, so the values equal the corresponding
/// entries of [`generate_trace`] bit for bit.
pub fn generate_samples_at<I>(scenario: &ValidatedScenario, trial_index: usize, indices: I) -> Vec<Complex64>
where
    I: IntoIterator<Item = usize>,
{
    let cfg = scenario.config();
    let params = cfg.params;
    let randoms = draw_trial_randoms(cfg.seed, trial_index as u64, cfg.n_sinusoids);
    let spec = scenario.specular();
    let norm = 1.0 / params.omega().sqrt();
    indices
        .into_iter()
        .map(|n| {
            let t = n as f64 * cfg.sample_period_s;
            let mut z = diffuse_sample(&randoms.diffuse, params.diffuse_power(), cfg.doppler_hz, t);
            for (s, phase) in spec.iter().zip(randoms.specular_phases) {
                if s.amplitude != 0.0 {
                    z += Complex64::from_polar(s.amplitude, phase + s.phase_rate * t);
                }
            }
            z * norm
        })
        .collect()
}

/// Generates trial `trial_index` of `scenario`.
pub fn generate_trace(scenario: &ValidatedScenario, trial_index: usize) -> FadingTrace {
    let cfg = scenario.config();
    let samples = generate_samples_at(scenario, trial_index, 0..cfg.n_samples);
    FadingTrace {
        samples,
        sample_period_s: cfg.sample_period_s,
        scenario_digest: scenario.digest(),
        trial_index,
        seed: cfg.seed,
    }
}

/// `M` traces of one scenario with trial indices `0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEnsemble {
    traces: Vec<FadingTrace>,
    scenario: ValidatedScenario,
}

impl TraceEnsemble {
    /// Assembles an ensemble, checking the trace invariants.
    pub fn from_traces(
        scenario: ValidatedScenario,
        traces: Vec<FadingTrace>,
    ) -> Result<TraceEnsemble, SosError> {
        if traces.is_empty() {
            return Err(SosError::Empty);
        }
        let expected = scenario.config().n_samples;
        for (position, trace) in traces.iter().enumerate() {
            if trace.trial_index != position {
                return Err(SosError::TrialIndexGap {
                    position,
                    trial: trace.trial_index,
                });
            }
            if trace.scenario_digest != scenario.digest()
                || trace.sample_period_s != scenario.config().sample_period_s
            {
                return Err(SosError::DigestMismatch { trial: position });
            }
            if trace.len() != expected {
                return Err(SosError::LengthMismatch {
                    trial: position,
                    expected,
                    got: trace.len(),
                });
            }
            if let Some(index) = trace
                .samples
                .iter()
                .position(|z| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Err(SosError::NonFinite {
                    trial: position,
                    index,
                });
            }
        }
        Ok(TraceEnsemble { traces, scenario })
    }

    pub fn traces(&self) -> &[FadingTrace] {
        &self.traces
    }

    pub fn scenario(&self) -> &ValidatedScenario {
        &self.scenario
    }

    pub fn n_trials(&self) -> usize {
        self.traces.len()
    }

    pub fn n_samples(&self) -> usize {
        self.scenario.config().n_samples
    }

    pub fn sample_period_s(&self) -> f64 {
        self.scenario.config().sample_period_s
    }

    pub fn doppler_hz(&self) -> f64 {
        self.scenario.config().doppler_hz
    }
}

/// Generates trials `0..M` in parallel and assembles them in index order.
pub fn generate_ensemble(scenario: &ValidatedScenario) -> Result<TraceEnsemble, SosError> {
    generate_trials(scenario, 0..scenario.config().n_trials)
        .and_then(|traces| TraceEnsemble::from_traces(scenario.clone(), traces))
}

/// Generates a contiguous block of trials, in index order.
pub fn generate_trials(
    scenario: &ValidatedScenario,
    trials: std::ops::Range<usize>,
) -> Result<Vec<FadingTrace>, SosError> {
    let traces: Vec<FadingTrace> = trials
        .into_par_iter()
        .map(|i| generate_trace(scenario, i))
        .collect();
    for trace in &traces {
        if let Some(index) = trace
            .samples
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(SosError::NonFinite {
                trial: trace.trial_index,
                index,
            });
        }
    }
    Ok(traces)
}
