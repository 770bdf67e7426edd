//! Declarative validation scenarios and their reports.
//!
//! A scenario names a channel, the statistics to estimate, the oracle they
//! are compared against and a tolerance per statistic. `run_validation`
//! generates the ensembles, computes deviations and records pass/fail; a
//! failed tolerance is a report entry, never an error.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::estimators::{
    decorrelation_stride, ensemble_correlations, sup_cdf_distance, AnchorPolicy,
    EstimatorError, LcrAccumulator, LcrCurve,
};
use crate::params::{validate_scenario, ChannelParams, ScenarioConfig, ScenarioErrors, ValidatedScenario};
use crate::sos::{generate_ensemble, generate_samples_at, generate_trials, SosError};
use crate::theory::{
    rayleigh_cdf, rayleigh_lcr_oracle, CorrelationKind, CorrelationSeries, EnvelopeCdf, LagGrid, LagGridError,
    Model, PdfError, TwdpCorrelations,
};

/// Correlations are compared over `f_D·τ ∈ [0, MAX_FD_TAU]`.
pub const MAX_FD_TAU: f64 = 10.0;
/// Max-abs tolerance of the correlation checks at 500 trials.
pub const CORRELATION_TOL: f64 = 0.05;
/// Sup-CDF tolerance of the envelope density checks.
pub const PDF_TOL: f64 = 0.01;
/// Sinusoid count of the pure-diffuse density checks.
pub const PDF_RAYLEIGH_SINUSOIDS: usize = 64;
/// Trials generated per block in the streaming (PDF, LCR) checks.
const STREAM_BLOCK: usize = 64;
/// XOR-ed into the seed for the second ensemble of a self-consistency check.
pub const SECOND_SEED_SALT: u64 = 0x5EED_0FD1_5C01_A7E5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("series differ in kind or grid")]
    GridMismatch,
    #[error("scenario {name}: {reason}")]
    InvalidScenario { name: String, reason: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioErrors),
    #[error(transparent)]
    Generation(#[from] SosError),
    #[error(transparent)]
    Estimation(#[from] EstimatorError),
    #[error(transparent)]
    Grid(#[from] LagGridError),
    #[error(transparent)]
    Pdf(#[from] PdfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// Closed-form statistics of the reference (infinite-N) model.
    ReferenceFormula,
    /// Closed-form statistics of the `N`-sinusoid simulator.
    SimulatorFormula,
    /// Rayleigh closed forms (`1 − e^{−z²}`, `√(2π)ρe^{−ρ²}`).
    ClosedFormOracle,
    /// A second ensemble under an independent seed.
    SelfConsistency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Correlation(CorrelationKind),
    EnvelopeCdf,
    Lcr { thresholds: Vec<f64> },
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::Correlation(k) => k.name().to_string(),
            Statistic::EnvelopeCdf => "envelope_cdf".to_string(),
            Statistic::Lcr { .. } => "lcr".to_string(),
        }
    }
}

/// How a deviation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Absolute difference of two series.
    Absolute,
    /// `|F_emp − F|` at every envelope pick.
    CdfDistance,
    /// `|r − r_oracle| / r_oracle`.
    Relative,
    /// `|r_a − r_b| / √(se_a² + se_b²)`.
    StandardScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub statistic: Statistic,
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationScenario {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub checks: Vec<Check>,
    pub oracle: Oracle,
    /// Free-form note, e.g. that results should also match a published
    /// Rician simulator.
    pub cross_check: Option<String>,
}

impl ValidationScenario {
    fn invalid(&self, reason: impl Into<String>) -> HarnessError {
        HarnessError::InvalidScenario {
            name: self.name.clone(),
            reason: reason.into(),
        }
    }

    /// Checks the scenario's own invariants and the oracle/statistic pairing.
    pub fn check(&self) -> Result<ValidatedScenario, HarnessError> {
        if self.checks.is_empty() {
            return Err(self.invalid("no statistics"));
        }
        for c in &self.checks {
            let t = c.tolerance;
            if !(t.max_abs > 0.0 && t.rms > 0.0) {
                return Err(self.invalid("tolerances must be positive"));
            }
            let ok = match (&c.statistic, self.oracle) {
                (Statistic::Correlation(_), Oracle::ReferenceFormula | Oracle::SimulatorFormula) => true,
                (Statistic::EnvelopeCdf, Oracle::ReferenceFormula) => true,
                (Statistic::EnvelopeCdf | Statistic::Lcr { .. }, Oracle::ClosedFormOracle) => {
                    self.scenario.params.is_rayleigh()
                }
                (Statistic::Lcr { .. }, Oracle::SelfConsistency) => true,
                _ => false,
            };
            if !ok {
                return Err(self.invalid(format!("{} cannot be checked against {:?}", c.statistic.name(), self.oracle)));
            }
        }
        Ok(validate_scenario(self.scenario.clone())?)
    }
}

fn tol(max_abs: f64, rms: f64) -> Tolerance {
    Tolerance { max_abs, rms }
}

/// The four correlation statistics of the quadrature-component figures plus
/// the squared-envelope ACF.
pub const CORRELATION_KINDS: [CorrelationKind; 5] = [
    CorrelationKind::Rxx,
    CorrelationKind::Rxy,
    CorrelationKind::RzzReal,
    CorrelationKind::RzzImag,
    CorrelationKind::Rsq,
];

fn channel(k: f64, gamma: f64) -> ChannelParams {
    ChannelParams::from_k_gamma(k, gamma, 1.0).expect("builtin channels are valid")
}

/// Correlation scenario at the default geometry.
pub fn correlation_scenario(k: f64, gamma: f64, oracle: Oracle, max_abs: f64) -> ValidationScenario {
    let checks = CORRELATION_KINDS
        .iter()
        .map(|&kind| Check {
            statistic: Statistic::Correlation(kind),
            tolerance: tol(max_abs, max_abs / 2.0),
        })
        .collect();
    ValidationScenario {
        name: format!("correlation K={k} Γ={gamma}"),
        scenario: ScenarioConfig::standard(channel(k, gamma)),
        checks,
        oracle,
        cross_check: (gamma == 0.0 && k > 0.0)
            .then(|| "Rician reduction: compare with published Rician sum-of-sinusoids curves".to_string()),
    }
}

/// Rayleigh squared-envelope ACF against the reference model. Expected to
/// fail: the finite-N simulator sits `d²(f_c + f_s)` below it, 1/N at τ = 0.
pub fn rayleigh_rsq_reference_scenario() -> ValidationScenario {
    ValidationScenario {
        name: "rayleigh rsq vs reference".to_string(),
        scenario: ScenarioConfig::standard(channel(0.0, 0.0)),
        checks: vec![Check {
            statistic: Statistic::Correlation(CorrelationKind::Rsq),
            tolerance: tol(CORRELATION_TOL, CORRELATION_TOL / 2.0),
        }],
        oracle: Oracle::ReferenceFormula,
        cross_check: None,
    }
}

/// The thresholds of the crossing-rate scenarios.
pub fn lcr_thresholds() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0]
}

pub fn builtin_scenarios() -> Vec<ValidationScenario> {
    let mut out: Vec<ValidationScenario> = [(0.0, 0.0), (10.0, 0.0), (10.0, 0.5), (10.0, 1.0)]
        .iter()
        .map(|&(k, g)| correlation_scenario(k, g, Oracle::SimulatorFormula, CORRELATION_TOL))
        .collect();

    // A sum of 8 equal phasors is visibly non-Gaussian (sup-CDF error near
    // 0.015 against Rayleigh), so the pure-diffuse density checks run with
    // 64 sinusoids. With K = 10 the diffuse part is small enough for N = 8.
    for (k, g, n, oracle) in [
        (0.0, 0.0, PDF_RAYLEIGH_SINUSOIDS, Oracle::ReferenceFormula),
        (0.0, 0.0, PDF_RAYLEIGH_SINUSOIDS, Oracle::ClosedFormOracle),
        (10.0, 0.5, 8, Oracle::ReferenceFormula),
        (10.0, 1.0, 8, Oracle::ReferenceFormula),
    ] {
        let mut scenario = ScenarioConfig::standard(channel(k, g));
        // Many short trials: picks from different trials are independent,
        // picks within one trial share its sinusoid angles.
        scenario.n_trials = 20_000;
        scenario.n_samples = 1001;
        scenario.n_sinusoids = n;
        out.push(ValidationScenario {
            name: format!("envelope pdf K={k} Γ={g} N={n} vs {oracle:?}"),
            scenario,
            checks: vec![Check {
                statistic: Statistic::EnvelopeCdf,
                tolerance: tol(PDF_TOL, PDF_TOL / 2.0),
            }],
            oracle,
            cross_check: None,
        });
    }

    for (a1, a2) in [(PI / 2.0, -PI / 2.0), (PI / 4.0, 2.0 * PI / 3.0)] {
        let mut scenario = ScenarioConfig::standard(channel(10.0, 1.0));
        scenario.aoa1 = a1;
        scenario.aoa2 = a2;
        scenario.n_samples = 10_000;
        out.push(ValidationScenario {
            name: format!("lcr K=10 Γ=1 α1={a1:.4} α2={a2:.4}"),
            scenario,
            checks: vec![Check {
                statistic: Statistic::Lcr {
                    thresholds: lcr_thresholds(),
                },
                tolerance: tol(3.0, 3.0),
            }],
            oracle: Oracle::SelfConsistency,
            cross_check: None,
        });
    }
    out
}

/// Max-abs and RMS deviation of two series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub max_abs: f64,
    pub rms: f64,
}

fn deviation_of(diffs: impl Iterator<Item = f64>) -> Deviation {
    let (mut max_abs, mut sq, mut n) = (0.0f64, 0.0, 0usize);
    for d in diffs {
        max_abs = max_abs.max(d.abs());
        sq += d * d;
        n += 1;
    }
    Deviation {
        max_abs,
        rms: if n == 0 { 0.0 } else { (sq / n as f64).sqrt() },
    }
}

pub fn compare_series(a: &CorrelationSeries, b: &CorrelationSeries) -> Result<Deviation, HarnessError> {
    if a.kind != b.kind || a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(HarnessError::GridMismatch);
    }
    Ok(deviation_of(a.values.iter().zip(&b.values).map(|(x, y)| x - y)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRecord {
    pub scenario: String,
    pub statistic: String,
    pub oracle: Oracle,
    pub metric: Metric,
    pub max_abs_dev: f64,
    pub rms_dev: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    pub n_trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub anchor_policy: AnchorPolicy,
    pub records: Vec<ValidationRecord>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only plain data")
    }
}

/// Lag grid of the correlation checks: every sample up to `f_D·τ = 10`.
pub fn correlation_grid(s: &ValidatedScenario) -> Result<LagGrid, LagGridError> {
    let cfg = s.config();
    let max_lag = (MAX_FD_TAU / cfg.fd_ts()).round() as usize;
    LagGrid::from_sample_lags(max_lag, 1, cfg.sample_period_s, cfg.doppler_hz)
}

fn correlation_records(
    vs: &ValidationScenario,
    s: &ValidatedScenario,
    kinds: &[(CorrelationKind, Tolerance)],
    anchors: &AnchorPolicy,
) -> Result<Vec<(String, Metric, Deviation, Tolerance)>, HarnessError> {
    let grid = correlation_grid(s)?;
    let ens = generate_ensemble(s)?;
    let just_kinds: Vec<CorrelationKind> = kinds.iter().map(|k| k.0).collect();
    let est = ensemble_correlations(&ens, &just_kinds, &grid, anchors)?;
    let theory = TwdpCorrelations::new(s.params(), s.rates(), s.config().doppler_hz);
    let model = match vs.oracle {
        Oracle::ReferenceFormula => Model::Reference,
        _ => Model::Simulator {
            n_sinusoids: s.config().n_sinusoids,
        },
    };
    est.iter()
        .zip(kinds)
        .map(|(e, &(kind, t))| {
            let oracle = theory.series(kind, model, &grid);
            Ok((kind.name().to_string(), Metric::Absolute, compare_series(&e.series, &oracle)?, t))
        })
        .collect()
}

/// Envelope picks of a whole scenario: every decorrelation stride of every
/// trial, evaluated without generating the samples in between.
pub fn scenario_envelope_picks(s: &ValidatedScenario) -> Vec<f64> {
    let cfg = s.config();
    let stride = decorrelation_stride(cfg.doppler_hz, cfg.sample_period_s);
    let per_trial: Vec<Vec<f64>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            generate_samples_at(s, i, (0..cfg.n_samples).step_by(stride))
                .iter()
                .map(|z| z.norm())
                .collect()
        })
        .collect();
    per_trial.concat()
}

/// Crossing-rate curve of a whole scenario, generated block by block.
pub fn stream_lcr(s: &ValidatedScenario, thresholds: &[f64]) -> Result<LcrCurve, HarnessError> {
    let cfg = s.config();
    let mut acc = LcrAccumulator::new(thresholds, cfg.n_samples, cfg.sample_period_s, cfg.doppler_hz)?;
    let mut start = 0;
    while start < cfg.n_trials {
        let end = (start + STREAM_BLOCK).min(cfg.n_trials);
        let traces = generate_trials(s, start..end)?;
        let counts: Vec<Vec<usize>> = traces.par_iter().map(|t| acc.count(t)).collect();
        for c in &counts {
            acc.add_counts(c);
        }
        start = end;
    }
    Ok(acc.finish()?)
}

fn cdf_record(vs: &ValidationScenario, s: &ValidatedScenario) -> Result<Deviation, HarnessError> {
    let mut picks = scenario_envelope_picks(s);
    picks.sort_by(|a, b| a.total_cmp(b));
    let table;
    let cdf: Box<dyn Fn(f64) -> f64 + Sync> = match vs.oracle {
        Oracle::ClosedFormOracle => Box::new(rayleigh_cdf),
        _ => {
            table = EnvelopeCdf::for_params(s.params())?;
            Box::new(|z| table.eval(z))
        }
    };
    let max_abs = sup_cdf_distance(&picks, &cdf);
    let n = picks.len() as f64;
    let rms = deviation_of(picks.iter().enumerate().map(|(i, &z)| cdf(z) - (i as f64 + 0.5) / n)).rms;
    Ok(Deviation { max_abs, rms })
}

fn lcr_record(
    vs: &ValidationScenario,
    s: &ValidatedScenario,
    thresholds: &[f64],
) -> Result<(Metric, Deviation), HarnessError> {
    let a = stream_lcr(s, thresholds)?;
    match vs.oracle {
        Oracle::SelfConsistency => {
            let b = stream_lcr(&s.with_seed(s.config().seed ^ SECOND_SEED_SALT), thresholds)?;
            let scores = (0..thresholds.len()).map(|j| {
                let se = (a.std_err[j].powi(2) + b.std_err[j].powi(2)).sqrt();
                let d = a.rates[j] - b.rates[j];
                if d == 0.0 {
                    0.0
                } else {
                    d / se
                }
            });
            Ok((Metric::StandardScore, deviation_of(scores)))
        }
        _ => {
            let rel = thresholds
                .iter()
                .zip(&a.rates)
                .map(|(&rho, &r)| (r - rayleigh_lcr_oracle(rho)) / rayleigh_lcr_oracle(rho));
            Ok((Metric::Relative, deviation_of(rel)))
        }
    }
}

fn run_scenario(vs: &ValidationScenario, seed: u64, anchors: &AnchorPolicy) -> Result<Vec<ValidationRecord>, HarnessError> {
    let mut cfg = vs.scenario.clone();
    cfg.seed = seed;
    let vs = ValidationScenario {
        scenario: cfg,
        ..vs.clone()
    };
    let s = vs.check()?;

    let mut results = Vec::new();
    let corr: Vec<(CorrelationKind, Tolerance)> = vs
        .checks
        .iter()
        .filter_map(|c| match c.statistic {
            Statistic::Correlation(k) => Some((k, c.tolerance)),
            _ => None,
        })
        .collect();
    if !corr.is_empty() {
        results.extend(correlation_records(&vs, &s, &corr, anchors)?);
    }
    for c in &vs.checks {
        match &c.statistic {
            Statistic::Correlation(_) => {}
            Statistic::EnvelopeCdf => {
                results.push((c.statistic.name(), Metric::CdfDistance, cdf_record(&vs, &s)?, c.tolerance));
            }
            Statistic::Lcr { thresholds } => {
                let (metric, dev) = lcr_record(&vs, &s, thresholds)?;
                results.push((c.statistic.name(), metric, dev, c.tolerance));
            }
        }
    }
    Ok(results
        .into_iter()
        .map(|(statistic, metric, dev, tolerance)| ValidationRecord {
            scenario: vs.name.clone(),
            statistic,
            oracle: vs.oracle,
            metric,
            max_abs_dev: dev.max_abs,
            rms_dev: dev.rms,
            tolerance,
            pass: dev.max_abs <= tolerance.max_abs && dev.rms <= tolerance.rms,
            n_trials: s.config().n_trials,
            seed,
            cross_check: vs.cross_check.clone(),
        })
        .collect())
}

/// Runs every scenario under `seed` and collects the records in declaration
/// order.
pub fn run_validation(scenarios: &[ValidationScenario], seed: u64) -> Result<ValidationReport, HarnessError> {
    let anchor_policy = AnchorPolicy::default();
    let per_scenario = scenarios
        .par_iter()
        .map(|vs| run_scenario(vs, seed, &anchor_policy))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<ValidationRecord> = per_scenario.into_iter().flatten().collect();
    let pass = records.iter().all(|r| r.pass);
    Ok(ValidationReport {
        seed,
        anchor_policy,
        records,
        pass,
    })
}
