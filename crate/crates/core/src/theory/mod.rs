//! Closed-form statistics of the TWDP reference model and of the
//! sum-of-sinusoids simulator.

mod bessel;
pub mod correlation;
pub mod kernels;
pub mod pdf;
pub mod quadrature;

use std::f64::consts::PI;

pub use bessel::bessel_j0;
pub use correlation::{
    ref_acf_complex, ref_acf_quadrature, ref_acf_squared, ref_ccf_quadrature, sim_acf_complex,
    sim_acf_quadrature, sim_acf_squared, sim_ccf_quadrature, CorrelationKind, CorrelationSeries,
    LagGrid, LagGridError, Model, SeriesSource, TwdpCorrelations,
};
pub use kernels::{f_c, f_s, kernels};
pub use pdf::{envelope_pdf_reference, rayleigh_cdf, rayleigh_pdf, EnvelopeCdf, PdfError};

/// Normalized Rayleigh level-crossing rate `√(2π)·ρ·exp(−ρ²)`, in crossings
/// per second divided by `f_D`, for a threshold `ρ` relative to the RMS
/// envelope.
pub fn rayleigh_lcr_oracle(rho: f64) -> f64 {
    (2.0 * PI).sqrt() * rho * (-rho * rho).exp()
}
