//! Sum-of-sinusoids simulation of TWDP (two-wave with diffuse power) fading.
//!
//! The crate is split along the simulation pipeline:
//!
//! - [`params`]: channel parameters, `(K, Γ)` conversions and scenario checks.
//! - [`sos`]: the trace generator (two stochastic tones plus an `N`-sinusoid
//!   diffuse component).
//! - [`theory`]: closed-form correlation functions, the `f_c`/`f_s` kernels,
//!   a reference envelope density and the Rayleigh crossing-rate oracle.
//! - [`estimators`]: ensemble estimates of the same statistics.
//! - [`harness`]: declarative validation scenarios and reports.
//! - [`io`]: trace files, configuration documents and CSV/JSON tables.

pub mod estimators;
pub mod harness;
pub mod io;
pub mod params;
pub mod sos;
pub mod theory;

pub use params::{ChannelParams, PhaseRates, ScenarioConfig, ValidatedScenario};
pub use sos::{FadingTrace, TraceEnsemble};
