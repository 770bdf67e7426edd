//! Closed-form correlation functions of the TWDP process.
//!
//! With `ρ_i = V_i²/Ω`, `d = 2σ²/Ω` and `J = J0(2π f_D τ)`:
//!
//! ```text
//! Rxx = Ryy   = ρ1/2·cos(φ̇1τ) + ρ2/2·cos(φ̇2τ) + d/2·J
//! Rxy = −Ryx  = ρ1/2·sin(φ̇1τ) + ρ2/2·sin(φ̇2τ)
//! Rzz         = ρ1·e^{−jφ̇1τ} + ρ2·e^{−jφ̇2τ} + d·J
//! R|z|²|z|²   = d·J·(d·J + 2ρ1 cos(φ̇1τ) + 2ρ2 cos(φ̇2τ)) + 1 + 2ρ1ρ2 cos((φ̇1−φ̇2)τ)
//! ```
//!
//! The sum-of-sinusoids simulator reproduces the first three exactly for any
//! `N`. Its squared-envelope correlation sits below the reference by
//! `d²·(f_c + f_s)(2π f_D τ, N)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bessel_j0;
use super::kernels::kernels;
use crate::params::{ChannelParams, PhaseRates};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagGridError {
    #[error("lag grid is empty")]
    Empty,
    #[error("lag {0} is negative or not finite")]
    InvalidLag(f64),
    #[error("lags must be strictly ascending (index {0})")]
    NotAscending(usize),
    #[error("doppler_hz must be finite and positive")]
    InvalidDoppler,
}

/// Ascending, non-negative time lags in seconds, with the Doppler frequency
/// for the normalized `f_D·τ` view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagGrid {
    lags: Vec<f64>,
    doppler_hz: f64,
}

impl LagGrid {
    pub fn new(lags: Vec<f64>, doppler_hz: f64) -> Result<LagGrid, LagGridError> {
        if !(doppler_hz.is_finite() && doppler_hz > 0.0) {
            return Err(LagGridError::InvalidDoppler);
        }
        if lags.is_empty() {
            return Err(LagGridError::Empty);
        }
        for (i, &tau) in lags.iter().enumerate() {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(LagGridError::InvalidLag(tau));
            }
            if i > 0 && tau <= lags[i - 1] {
                return Err(LagGridError::NotAscending(i));
            }
        }
        Ok(LagGrid { lags, doppler_hz })
    }

    /// Lags `0, step, 2·step, …` in sample units up to `max_lag` samples.
    pub fn from_sample_lags(
        max_lag: usize,
        step: usize,
        sample_period_s: f64,
        doppler_hz: f64,
    ) -> Result<LagGrid, LagGridError> {
        let step = step.max(1);
        let lags = (0..=max_lag)
            .step_by(step)
            .map(|l| l as f64 * sample_period_s)
            .collect();
        LagGrid::new(lags, doppler_hz)
    }

    /// `f_D·τ ∈ [0, max]` in increments of `step`.
    pub fn normalized(max_fd_tau: f64, step: f64, doppler_hz: f64) -> Result<LagGrid, LagGridError> {
        if !(step > 0.0 && max_fd_tau >= 0.0) {
            return Err(LagGridError::Empty);
        }
        let count = (max_fd_tau / step + 1e-9).floor() as usize;
        let lags = (0..=count).map(|k| k as f64 * step / doppler_hz).collect();
        LagGrid::new(lags, doppler_hz)
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    /// Normalized lags `f_D·τ`.
    pub fn fd_tau(&self) -> Vec<f64> {
        self.lags.iter().map(|t| t * self.doppler_hz).collect()
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }
}

/// Which correlation statistic a series holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Rxx,
    Ryy,
    Rxy,
    Ryx,
    RzzReal,
    RzzImag,
    Rsq,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 7] = [
        CorrelationKind::Rxx,
        CorrelationKind::Ryy,
        CorrelationKind::Rxy,
        CorrelationKind::Ryx,
        CorrelationKind::RzzReal,
        CorrelationKind::RzzImag,
        CorrelationKind::Rsq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorrelationKind::Rxx => "rxx",
            CorrelationKind::Ryy => "ryy",
            CorrelationKind::Rxy => "rxy",
            CorrelationKind::Ryx => "ryx",
            CorrelationKind::RzzReal => "rzz_real",
            CorrelationKind::RzzImag => "rzz_imag",
            CorrelationKind::Rsq => "rsq",
        }
    }
}

/// Where a series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesSource {
    Reference,
    SimulatorFormula,
    Empirical,
}

/// Values of one statistic on a lag grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub kind: CorrelationKind,
    pub source: SeriesSource,
    pub grid: LagGrid,
    pub values: Vec<f64>,
    pub n_trials: Option<usize>,
}

/// Closed-form model: `N → ∞` reference or the `N`-sinusoid simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Reference,
    Simulator { n_sinusoids: usize },
}

impl Model {
    pub fn source(self) -> SeriesSource {
        match self {
            Model::Reference => SeriesSource::Reference,
            Model::Simulator { .. } => SeriesSource::SimulatorFormula,
        }
    }
}

/// Pointwise closed forms for one channel and geometry. Lags may be
/// negative here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwdpCorrelations {
    rho1: f64,
    rho2: f64,
    diffuse: f64,
    rates: PhaseRates,
    doppler_hz: f64,
}

impl TwdpCorrelations {
    pub fn new(p: &ChannelParams, rates: PhaseRates, doppler_hz: f64) -> Self {
        let omega = p.omega();
        TwdpCorrelations {
            rho1: p.v1() * p.v1() / omega,
            rho2: p.v2() * p.v2() / omega,
            diffuse: p.diffuse_power() / omega,
            rates,
            doppler_hz,
        }
    }

    fn j0(&self, tau: f64) -> f64 {
        bessel_j0(2.0 * PI * self.doppler_hz * tau)
    }

    pub fn rxx(&self, tau: f64) -> f64 {
        0.5 * (self.rho1 * (self.rates.first * tau).cos()
            + self.rho2 * (self.rates.second * tau).cos()
            + self.diffuse * self.j0(tau))
    }

    pub fn rxy(&self, tau: f64) -> f64 {
        0.5 * (self.rho1 * (self.rates.first * tau).sin() + self.rho2 * (self.rates.second * tau).sin())
    }

    pub fn rzz(&self, tau: f64) -> Complex64 {
        Complex64::from_polar(self.rho1, -self.rates.first * tau)
            + Complex64::from_polar(self.rho2, -self.rates.second * tau)
            + self.diffuse * self.j0(tau)
    }

    pub fn rsq_reference(&self, tau: f64) -> f64 {
        let dj = self.diffuse * self.j0(tau);
        dj * (dj
            + 2.0 * self.rho1 * (self.rates.first * tau).cos()
            + 2.0 * self.rho2 * (self.rates.second * tau).cos())
            + 1.0
            + 2.0 * self.rho1 * self.rho2 * ((self.rates.first - self.rates.second) * tau).cos()
    }

    /// Gap between reference and simulator squared-envelope correlations.
    pub fn rsq_finite_n_gap(&self, tau: f64, n_sinusoids: usize) -> f64 {
        if self.diffuse == 0.0 {
            return 0.0;
        }
        let (c, s) = kernels(2.0 * PI * self.doppler_hz * tau, n_sinusoids);
        self.diffuse * self.diffuse * (c + s)
    }

    pub fn rsq_simulator(&self, tau: f64, n_sinusoids: usize) -> f64 {
        self.rsq_reference(tau) - self.rsq_finite_n_gap(tau, n_sinusoids)
    }

    /// Any statistic under either model. Only `Rsq` depends on the model.
    pub fn value(&self, kind: CorrelationKind, model: Model, tau: f64) -> f64 {
        match kind {
            CorrelationKind::Rxx | CorrelationKind::Ryy => self.rxx(tau),
            CorrelationKind::Rxy => self.rxy(tau),
            CorrelationKind::Ryx => -self.rxy(tau),
            CorrelationKind::RzzReal => self.rzz(tau).re,
            CorrelationKind::RzzImag => self.rzz(tau).im,
            CorrelationKind::Rsq => match model {
                Model::Reference => self.rsq_reference(tau),
                Model::Simulator { n_sinusoids } => self.rsq_simulator(tau, n_sinusoids),
            },
        }
    }

    pub fn series(&self, kind: CorrelationKind, model: Model, grid: &LagGrid) -> CorrelationSeries {
        let values = grid
            .lags()
            .par_iter()
            .map(|&tau| self.value(kind, model, tau))
            .collect();
        CorrelationSeries {
            kind,
            source: model.source(),
            grid: grid.clone(),
            values,
            n_trials: None,
        }
    }
}

/// Reference `Rxx(τ) = Ryy(τ)`.
pub fn ref_acf_quadrature(p: &ChannelParams, rates: PhaseRates, doppler_hz: f64, grid: &LagGrid) -> CorrelationSeries {
    TwdpCorrelations::new(p, rates, doppler_hz).series(CorrelationKind::Rxx, Model::Reference, grid)
}

/// Reference `Rxy(τ) = −Ryx(τ)`. Independent of the Doppler spread.
pub fn ref_ccf_quadrature(p: &ChannelParams, rates: PhaseRates, grid: &LagGrid) -> CorrelationSeries {
    TwdpCorrelations::new(p, rates, grid.doppler_hz()).series(CorrelationKind::Rxy, Model::Reference, grid)
}

/// Reference `Rzz(τ)` as `(real, imaginary)` series.
pub fn ref_acf_complex(
    p: &ChannelParams,
    rates: PhaseRates,
    doppler_hz: f64,
    grid: &LagGrid,
) -> (CorrelationSeries, CorrelationSeries) {
    let model = TwdpCorrelations::new(p, rates, doppler_hz);
    (
        model.series(CorrelationKind::RzzReal, Model::Reference, grid),
        model.series(CorrelationKind::RzzImag, Model::Reference, grid),
    )
}

/// Reference squared-envelope correlation.
pub fn ref_acf_squared(p: &ChannelParams, rates: PhaseRates, doppler_hz: f64, grid: &LagGrid) -> CorrelationSeries {
    TwdpCorrelations::new(p, rates, doppler_hz).series(CorrelationKind::Rsq, Model::Reference, grid)
}

/// Squared-envelope correlation of the `N`-sinusoid simulator.
pub fn sim_acf_squared(
    p: &ChannelParams,
    rates: PhaseRates,
    doppler_hz: f64,
    n_sinusoids: usize,
    grid: &LagGrid,
) -> CorrelationSeries {
    TwdpCorrelations::new(p, rates, doppler_hz).series(CorrelationKind::Rsq, Model::Simulator { n_sinusoids }, grid)
}

// The simulator's first- and second-order quadrature statistics do not
// depend on N: they are the reference functions.
pub use self::ref_acf_complex as sim_acf_complex;
pub use self::ref_acf_quadrature as sim_acf_quadrature;
pub use self::ref_ccf_quadrature as sim_ccf_quadrature;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geometry(k: f64, gamma: f64, a1: f64, a2: f64) -> (ChannelParams, PhaseRates) {
        (
            ChannelParams::from_k_gamma(k, gamma, 1.0).unwrap(),
            PhaseRates::from_aoas(a1, a2, 1000.0),
        )
    }

    fn default_grid() -> LagGrid {
        LagGrid::normalized(10.0, 0.01, 1000.0).unwrap()
    }

    #[test]
    fn lag_grid_validation() {
        assert_eq!(LagGrid::new(vec![], 1.0), Err(LagGridError::Empty));
        assert_eq!(LagGrid::new(vec![0.0, 0.0], 1.0), Err(LagGridError::NotAscending(1)));
        assert_eq!(LagGrid::new(vec![-1.0], 1.0), Err(LagGridError::InvalidLag(-1.0)));
        assert_eq!(LagGrid::new(vec![0.0], 0.0), Err(LagGridError::InvalidDoppler));
        let g = default_grid();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.lags()[0], 0.0);
        assert!((g.fd_tau()[1000] - 10.0).abs() < 1e-12);
        let s = LagGrid::from_sample_lags(1000, 1, 1e-5, 1000.0).unwrap();
        assert_eq!(s.len(), 1001);
    }

    #[test]
    fn zero_lag_normalization() {
        let (p, r) = geometry(10.0, 0.5, PI / 4.0, 2.0 * PI / 3.0);
        let g = LagGrid::new(vec![0.0], 1000.0).unwrap();
        assert!((ref_acf_quadrature(&p, r, 1000.0, &g).values[0] - 0.5).abs() < 1e-15);
        assert_eq!(ref_ccf_quadrature(&p, r, &g).values[0], 0.0);
        let (re, im) = ref_acf_complex(&p, r, 1000.0, &g);
        assert!((re.values[0] - 1.0).abs() < 1e-15);
        assert_eq!(im.values[0], 0.0);
    }

    #[test]
    fn rayleigh_acf_is_bessel() {
        let (p, r) = geometry(0.0, 0.0, 0.3, 1.1);
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        let tau = 2.404825557695773 / (2.0 * PI * 1000.0);
        assert!((tau * 1000.0 - 0.38274).abs() < 1e-5);
        assert!(m.rxx(tau).abs() < 1e-6);
        assert!((m.rxx(1.3e-3) - 0.5 * bessel_j0(2.0 * PI * 1.3)).abs() < 1e-15);
        let s = ref_ccf_quadrature(&p, r, &default_grid());
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn perpendicular_equal_tones_freeze() {
        let (p, r) = geometry(1e12, 1.0, PI / 2.0, -PI / 2.0);
        let s = ref_acf_quadrature(&p, r, 1000.0, &default_grid());
        assert!(s.values.iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn complex_acf_consistent_with_quadrature_pair() {
        let (p, r) = geometry(10.0, 0.5, PI / 4.0, 2.0 * PI / 3.0);
        let g = default_grid();
        let (re, im) = ref_acf_complex(&p, r, 1000.0, &g);
        let xx = ref_acf_quadrature(&p, r, 1000.0, &g);
        let xy = ref_ccf_quadrature(&p, r, &g);
        for i in 0..g.len() {
            assert!((re.values[i] - 2.0 * xx.values[i]).abs() < 1e-14);
            assert!((im.values[i] + 2.0 * xy.values[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn squared_envelope_zero_lag() {
        let (p, r) = geometry(0.0, 0.0, 0.0, 0.0);
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        assert!((m.rsq_reference(0.0) - 2.0).abs() < 1e-15);
        assert!((m.rsq_simulator(0.0, 8) - 1.875).abs() < 1e-12);

        let (p, r) = geometry(10.0, 0.5, PI / 4.0, 2.0 * PI / 3.0);
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        let (d, r1, r2) = (p.diffuse_power(), p.v1().powi(2), p.v2().powi(2));
        let expected = 1.0 + d * (d + 2.0 * r1 + 2.0 * r2) + 2.0 * r1 * r2;
        assert!((m.rsq_reference(0.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn two_tone_squared_envelope() {
        let p = ChannelParams::from_amplitudes(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0).unwrap();
        let r = PhaseRates::from_aoas(PI / 4.0, 2.0 * PI / 3.0, 1000.0);
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        for tau in [0.0, 1e-4, 3.3e-3] {
            let expected = 1.0 + 0.5 * ((r.first - r.second) * tau).cos();
            assert!((m.rsq_reference(tau) - expected).abs() < 1e-14);
            assert_eq!(m.rsq_simulator(tau, 8), m.rsq_reference(tau));
        }
    }

    #[test]
    fn simulator_gap_bounded_by_inverse_n() {
        let (p, r) = geometry(10.0, 0.5, PI / 4.0, 2.0 * PI / 3.0);
        let g = LagGrid::normalized(10.0, 0.05, 1000.0).unwrap();
        let reference = ref_acf_squared(&p, r, 1000.0, &g);
        let sim = sim_acf_squared(&p, r, 1000.0, 8, &g);
        let bound = p.diffuse_power().powi(2) / 8.0;
        assert!((bound - 1.03e-3).abs() < 1e-5);
        let max_dev = reference
            .values
            .iter()
            .zip(&sim.values)
            .map(|(a, b)| a - b)
            .fold(0.0f64, f64::max);
        assert!(max_dev <= bound + 1e-12);
        assert!(reference.values.iter().zip(&sim.values).all(|(a, b)| a >= b));
    }

    #[test]
    fn simulator_converges_to_reference_with_n() {
        let (p, r) = geometry(0.0, 0.0, 0.0, 0.0);
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        let lags = [0.0, 1e-4, 4e-4, 1.5e-3, 7e-3];
        let dev = |n: usize| {
            lags.iter()
                .map(|&t| (m.rsq_reference(t) - m.rsq_simulator(t, n)).abs())
                .fold(0.0f64, f64::max)
        };
        let d1024 = dev(1024);
        assert!(d1024 * 1024.0 <= 1.0 + 1e-9);
        assert!(dev(64) > d1024);
        assert!(dev(8) > dev(64));
    }

    #[test]
    fn model_only_matters_for_squared_envelope() {
        let (p, r) = geometry(3.0, 0.7, 0.4, -2.2);
        let g = LagGrid::normalized(5.0, 0.1, 1000.0).unwrap();
        let m = TwdpCorrelations::new(&p, r, 1000.0);
        for kind in CorrelationKind::ALL {
            let a = m.series(kind, Model::Reference, &g);
            let b = m.series(kind, Model::Simulator { n_sinusoids: 8 }, &g);
            if kind == CorrelationKind::Rsq {
                assert_ne!(a.values, b.values);
            } else {
                assert_eq!(a.values, b.values);
            }
        }
        // The simulator's quadrature statistics are the reference functions.
        let f: fn(&ChannelParams, PhaseRates, f64, &LagGrid) -> CorrelationSeries = sim_acf_quadrature;
        assert_eq!(f(&p, r, 1000.0, &g), ref_acf_quadrature(&p, r, 1000.0, &g));
        assert_eq!(sim_ccf_quadrature(&p, r, &g), ref_ccf_quadrature(&p, r, &g));
        assert_eq!(sim_acf_complex(&p, r, 1000.0, &g), ref_acf_complex(&p, r, 1000.0, &g));
    }

    proptest! {
        #[test]
        fn parity_under_lag_reversal(
            k in 0.0f64..50.0, gamma in 0.0f64..=1.0,
            a1 in -PI..PI, a2 in -PI..PI, tau in 0.0f64..0.02,
        ) {
            let (p, r) = geometry(k, gamma, a1, a2);
            let m = TwdpCorrelations::new(&p, r, 1000.0);
            prop_assert!((m.rxy(-tau) + m.rxy(tau)).abs() < 1e-15);
            prop_assert!((m.rzz(-tau).re - m.rzz(tau).re).abs() < 1e-15);
            prop_assert!((m.rzz(-tau).im + m.rzz(tau).im).abs() < 1e-15);
            prop_assert!((m.rxx(-tau) - m.rxx(tau)).abs() < 1e-15);
        }

        #[test]
        fn normalization_identities(k in 0.0f64..1e3, gamma in 0.0f64..=1.0, omega in 0.1f64..10.0, a1 in -PI..PI, a2 in -PI..PI) {
            let p = ChannelParams::from_k_gamma(k, gamma, omega).unwrap();
            let m = TwdpCorrelations::new(&p, PhaseRates::from_aoas(a1, a2, 50.0), 50.0);
            prop_assert!((m.rxx(0.0) - 0.5).abs() <= 1e-12);
            prop_assert!((m.rzz(0.0) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
            prop_assert_eq!(m.rxy(0.0), 0.0);
        }
    }
}
