//! Ensemble estimators of the simulated statistics.
//!
//! Correlations average the lagged product over trials and over a fixed set
//! of anchor times. Anchor averaging relies on wide-sense stationarity, which
//! the stationarity checks test separately by comparing early and late
//! anchor windows.
//!
//! Every estimator works trial by trial and reduces the per-trial results in
//! trial order, so results do not depend on the rayon schedule.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sos::{FadingTrace, TraceEnsemble};
use crate::theory::{CorrelationKind, CorrelationSeries, LagGrid, SeriesSource};

/// Default spacing between anchor times, in samples.
pub const DEFAULT_ANCHOR_STRIDE: usize = 10;
/// Envelope picks are at least this many Doppler periods apart.
pub const DECORRELATION_DOPPLER_PERIODS: f64 = 2.0;

/// Trials reduced sequentially inside one parallel work item.
const TRIAL_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("lag {lag} s is not an integer multiple of the sample period {sample_period} s")]
    LagNotOnGrid { lag: f64, sample_period: f64 },
    #[error("lag of {lag} samples does not fit in traces of {n_samples} samples")]
    LagTooLong { lag: usize, n_samples: usize },
    #[error("anchor policy leaves no anchor times")]
    NoAnchors,
    #[error("ensemble holds no samples")]
    Empty,
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("histogram range [{0}, {1}) is invalid")]
    InvalidRange(f64, f64),
    #[error("envelope {0} falls outside the histogram range")]
    OutOfRange(f64),
    #[error("threshold {0} must be finite and non-negative")]
    InvalidThreshold(f64),
}

/// Which anchor times enter the correlation average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnchorPolicy {
    pub stride: usize,
    pub start: usize,
    /// Exclusive upper bound on anchors; `None` means "up to the last sample
    /// that still leaves room for the largest lag".
    pub end: Option<usize>,
}

impl Default for AnchorPolicy {
    fn default() -> Self {
        AnchorPolicy {
            stride: DEFAULT_ANCHOR_STRIDE,
            start: 0,
            end: None,
        }
    }
}

impl AnchorPolicy {
    /// Anchors in `[start, end)` every `stride` samples.
    pub fn window(start: usize, end: usize, stride: usize) -> Self {
        AnchorPolicy {
            stride,
            start,
            end: Some(end),
        }
    }

    pub fn anchors(&self, n_samples: usize, max_lag: usize) -> Result<Vec<usize>, EstimatorError> {
        if max_lag >= n_samples {
            return Err(EstimatorError::LagTooLong {
                lag: max_lag,
                n_samples,
            });
        }
        let limit = n_samples - max_lag;
        let end = self.end.map_or(limit, |e| e.min(limit));
        let anchors: Vec<usize> = (self.start..end).step_by(self.stride.max(1)).collect();
        if anchors.is_empty() {
            return Err(EstimatorError::NoAnchors);
        }
        Ok(anchors)
    }
}

/// A correlation estimate with the standard error of each value, taken from
/// the spread of the per-trial estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub series: CorrelationSeries,
    pub std_err: Vec<f64>,
}

fn lags_in_samples(grid: &LagGrid, sample_period: f64) -> Result<Vec<usize>, EstimatorError> {
    grid.lags()
        .iter()
        .map(|&lag| {
            let ratio = lag / sample_period;
            let rounded = ratio.round();
            if (ratio - rounded).abs() > 1e-6 * rounded.max(1.0) {
                Err(EstimatorError::LagNotOnGrid { lag, sample_period })
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

const N_PRODUCTS: usize = 7;

fn product_index(kind: CorrelationKind) -> usize {
    match kind {
        CorrelationKind::Rxx => 0,
        CorrelationKind::Ryy => 1,
        CorrelationKind::Rxy => 2,
        CorrelationKind::Ryx => 3,
        CorrelationKind::RzzReal => 4,
        CorrelationKind::RzzImag => 5,
        CorrelationKind::Rsq => 6,
    }
}

/// Per-trial anchor averages of all seven lagged products.
fn trial_products(samples: &[Complex64], lags: &[usize], anchors: &[usize]) -> Vec<[f64; N_PRODUCTS]> {
    let norm = 1.0 / anchors.len() as f64;
    lags.iter()
        .map(|&lag| {
            let mut acc = [0.0; N_PRODUCTS];
            for &a in anchors {
                let z0 = samples[a];
                let z1 = samples[a + lag];
                let zz = z0 * z1.conj();
                acc[0] += z0.re * z1.re;
                acc[1] += z0.im * z1.im;
                acc[2] += z0.re * z1.im;
                acc[3] += z0.im * z1.re;
                acc[4] += zz.re;
                acc[5] += zz.im;
                acc[6] += z0.norm_sqr() * z1.norm_sqr();
            }
            acc.map(|v| v * norm)
        })
        .collect()
}

/// Sum and sum of squares over a fixed trial order.
#[derive(Clone)]
struct Moments {
    sum: Vec<[f64; N_PRODUCTS]>,
    sum_sq: Vec<[f64; N_PRODUCTS]>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Moments {
            sum: vec![[0.0; N_PRODUCTS]; len],
            sum_sq: vec![[0.0; N_PRODUCTS]; len],
        }
    }

    fn add_trial(&mut self, trial: &[[f64; N_PRODUCTS]]) {
        for ((s, q), t) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(trial) {
            for k in 0..N_PRODUCTS {
                s[k] += t[k];
                q[k] += t[k] * t[k];
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            for k in 0..N_PRODUCTS {
                a[k] += b[k];
            }
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            for k in 0..N_PRODUCTS {
                a[k] += b[k];
            }
        }
    }
}

fn mean_and_std_err(sum: f64, sum_sq: f64, m: usize) -> (f64, f64) {
    let mf = m as f64;
    let mean = sum / mf;
    if m < 2 {
        return (mean, f64::NAN);
    }
    let var = ((sum_sq - sum * mean) / (mf - 1.0)).max(0.0);
    (mean, (var / mf).sqrt())
}

/// Estimates several correlation statistics in one pass.
pub fn ensemble_correlations(
    ens: &TraceEnsemble,
    kinds: &[CorrelationKind],
    grid: &LagGrid,
    anchors: &AnchorPolicy,
) -> Result<Vec<CorrelationEstimate>, EstimatorError> {
    let lags = lags_in_samples(grid, ens.sample_period_s())?;
    let max_lag = *lags.last().expect("lag grids are non-empty");
    let anchor_times = anchors.anchors(ens.n_samples(), max_lag)?;

    let chunks: Vec<Moments> = ens
        .traces()
        .par_chunks(TRIAL_CHUNK)
        .map(|chunk| {
            let mut m = Moments::zeros(lags.len());
            for trace in chunk {
                m.add_trial(&trial_products(&trace.samples, &lags, &anchor_times));
            }
            m
        })
        .collect();
    let mut total = Moments::zeros(lags.len());
    for c in &chunks {
        total.merge(c);
    }

    let m = ens.n_trials();
    Ok(kinds
        .iter()
        .map(|&kind| {
            let k = product_index(kind);
            let (values, std_err) = total
                .sum
                .iter()
                .zip(&total.sum_sq)
                .map(|(s, q)| mean_and_std_err(s[k], q[k], m))
                .unzip();
            CorrelationEstimate {
                series: CorrelationSeries {
                    kind,
                    source: SeriesSource::Empirical,
                    grid: grid.clone(),
                    values,
                    n_trials: Some(m),
                },
                std_err,
            }
        })
        .collect())
}

/// Ensemble estimate of one statistic with the default anchor policy.
pub fn ensemble_correlation(
    ens: &TraceEnsemble,
    kind: CorrelationKind,
    grid: &LagGrid,
) -> Result<CorrelationSeries, EstimatorError> {
    let mut out = ensemble_correlations(ens, &[kind], grid, &AnchorPolicy::default())?;
    Ok(out.remove(0).series)
}

/// Envelope histogram normalized to unit integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramDensity {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
}

impl HistogramDensity {
    pub fn bin_centres(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }
}

/// Sample spacing that puts picks `DECORRELATION_DOPPLER_PERIODS` apart.
pub fn decorrelation_stride(doppler_hz: f64, sample_period_s: f64) -> usize {
    (DECORRELATION_DOPPLER_PERIODS / (doppler_hz * sample_period_s) - 1e-9).ceil().max(1.0) as usize
}

/// Envelope values `|z|` sampled once per decorrelation stride in every
/// trial, in trial order.
pub fn envelope_picks(ens: &TraceEnsemble) -> Vec<f64> {
    let stride = decorrelation_stride(ens.doppler_hz(), ens.sample_period_s());
    ens.traces()
        .iter()
        .flat_map(|t| trace_envelope_picks(t, stride))
        .collect()
}

/// Envelope picks of a single trace, every `stride` samples from the start.
pub fn trace_envelope_picks(trace: &FadingTrace, stride: usize) -> impl Iterator<Item = f64> + '_ {
    trace.samples.iter().step_by(stride.max(1)).map(|z| z.norm())
}

/// Histogram of decorrelated envelope picks over `[lo, hi]`.
pub fn envelope_pdf(ens: &TraceEnsemble, bins: usize, range: (f64, f64)) -> Result<HistogramDensity, EstimatorError> {
    histogram(&envelope_picks(ens), bins, range)
}

/// Unit-integral histogram of `values` over `[lo, hi]`; the top edge is
/// inclusive.
pub fn histogram(values: &[f64], bins: usize, (lo, hi): (f64, f64)) -> Result<HistogramDensity, EstimatorError> {
    if bins < 2 {
        return Err(EstimatorError::TooFewBins(bins));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(EstimatorError::InvalidRange(lo, hi));
    }
    if values.is_empty() {
        return Err(EstimatorError::Empty);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(v >= lo && v <= hi) {
            return Err(EstimatorError::OutOfRange(v));
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len();
    let bin_edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let densities = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
    Ok(HistogramDensity {
        bin_edges,
        densities,
        n_samples: n,
    })
}

/// Kolmogorov distance `sup |F_emp − F|` between picks and a CDF.
pub fn sup_cdf_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Normalized level-crossing rates with per-threshold standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcrCurve {
    pub thresholds: Vec<f64>,
    pub rates: Vec<f64>,
    pub std_err: Vec<f64>,
    pub observation_time_s: f64,
    pub n_trials: usize,
}

/// Upward crossings of each threshold: pairs with `|z[n]| <= ρ < |z[n+1]|`.
fn upward_crossings(trace: &FadingTrace, thresholds: &[f64]) -> Vec<usize> {
    let env: Vec<f64> = trace.samples.iter().map(|z| z.norm()).collect();
    thresholds
        .iter()
        .map(|&rho| env.windows(2).filter(|w| w[0] <= rho && w[1] > rho).count())
        .collect()
}

/// Running level-crossing statistics over traces of one length, fed in
/// trial order.
#[derive(Debug, Clone)]
pub struct LcrAccumulator {
    thresholds: Vec<f64>,
    scale: f64,
    per_trial_time: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    n_trials: usize,
}

impl LcrAccumulator {
    pub fn new(
        thresholds: &[f64],
        n_samples: usize,
        sample_period_s: f64,
        doppler_hz: f64,
    ) -> Result<Self, EstimatorError> {
        if let Some(&bad) = thresholds.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(EstimatorError::InvalidThreshold(bad));
        }
        if n_samples < 2 {
            return Err(EstimatorError::Empty);
        }
        let per_trial_time = (n_samples - 1) as f64 * sample_period_s;
        Ok(LcrAccumulator {
            thresholds: thresholds.to_vec(),
            scale: 1.0 / (per_trial_time * doppler_hz),
            per_trial_time,
            sum: vec![0.0; thresholds.len()],
            sum_sq: vec![0.0; thresholds.len()],
            n_trials: 0,
        })
    }

    pub fn add_counts(&mut self, counts: &[usize]) {
        for ((s, q), &c) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(counts) {
            let r = c as f64 * self.scale;
            *s += r;
            *q += r * r;
        }
        self.n_trials += 1;
    }

    /// Crossing counts of one trace; pure, so callers may run it in parallel
    /// and feed the counts back in order.
    pub fn count(&self, trace: &FadingTrace) -> Vec<usize> {
        upward_crossings(trace, &self.thresholds)
    }

    pub fn finish(&self) -> Result<LcrCurve, EstimatorError> {
        if self.n_trials == 0 {
            return Err(EstimatorError::Empty);
        }
        let (rates, std_err) = self
            .sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &q)| mean_and_std_err(s, q, self.n_trials))
            .unzip();
        Ok(LcrCurve {
            thresholds: self.thresholds.clone(),
            rates,
            std_err,
            observation_time_s: self.per_trial_time * self.n_trials as f64,
            n_trials: self.n_trials,
        })
    }
}

/// Level-crossing rate per threshold, normalized by `f_D`. Thresholds are
/// relative to the RMS envelope, which is 1 for normalized traces.
pub fn level_crossing_rate(ens: &TraceEnsemble, thresholds: &[f64]) -> Result<LcrCurve, EstimatorError> {
    let mut acc = LcrAccumulator::new(thresholds, ens.n_samples(), ens.sample_period_s(), ens.doppler_hz())?;
    let counts: Vec<Vec<usize>> = ens.traces().par_iter().map(|t| acc.count(t)).collect();
    for c in &counts {
        acc.add_counts(c);
    }
    acc.finish()
}

/// Ensemble-and-time mean of `z` with the per-component standard error from
/// the spread of per-trial means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: Complex64,
    pub std_err_re: f64,
    pub std_err_im: f64,
}

pub fn ensemble_mean_estimate(ens: &TraceEnsemble) -> MeanEstimate {
    let trial_means: Vec<Complex64> = ens
        .traces()
        .iter()
        .map(|t| t.samples.iter().sum::<Complex64>() / t.len() as f64)
        .collect();
    let m = trial_means.len();
    let (sr, qr, si, qi) = trial_means
        .iter()
        .fold((0.0, 0.0, 0.0, 0.0), |(sr, qr, si, qi), z| {
            (sr + z.re, qr + z.re * z.re, si + z.im, qi + z.im * z.im)
        });
    let (re, se_re) = mean_and_std_err(sr, qr, m);
    let (im, se_im) = mean_and_std_err(si, qi, m);
    MeanEstimate {
        mean: Complex64::new(re, im),
        std_err_re: se_re,
        std_err_im: se_im,
    }
}

/// Average of `z` over trials and time.
pub fn ensemble_mean(ens: &TraceEnsemble) -> Complex64 {
    ensemble_mean_estimate(ens).mean
}
