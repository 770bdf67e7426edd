//! Reference envelope density of the TWDP process.
//!
//! Two fixed-amplitude phasors with independent uniform phases plus a
//! circular Gaussian have a characteristic function that factors into
//! Bessel functions. Inverting it gives, in units normalized by `√Ω`,
//!
//! ```text
//! f(z) = z ∫_0^∞ u J0(zu) J0(a u) J0(b u) exp(−s u²/2) du
//! ```
//!
//! with `a = V1/√Ω`, `b = V2/√Ω` and `s = σ²/Ω`. The integral is truncated
//! where the Gaussian factor drops below 1e-14.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use super::bessel_j0;
use super::quadrature::integrate;
use crate::params::ChannelParams;

/// Values below this are quadrature noise and clamp to zero.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-8;

const GAUSS_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdfError {
    #[error("reference density needs diffuse power; two pure tones have a singular envelope density")]
    NoDiffusePower,
    #[error("envelope value {0} must be finite and non-negative")]
    InvalidEnvelope(f64),
    #[error("density at z = {z} evaluated to {value}")]
    NegativeDensity { z: f64, value: f64 },
}

/// Normalized TWDP envelope density at `z` (envelope divided by `√Ω`).
pub fn envelope_pdf_reference(p: &ChannelParams, z: f64) -> Result<f64, PdfError> {
    if p.diffuse_power() == 0.0 {
        return Err(PdfError::NoDiffusePower);
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(PdfError::InvalidEnvelope(z));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let root = p.omega().sqrt();
    let a = p.v1() / root;
    let b = p.v2() / root;
    let s = 0.5 * p.diffuse_power() / p.omega();
    let u_max = (2.0 * (1.0 / GAUSS_CUTOFF).ln() / s).sqrt();
    // One panel per half period of the fastest Bessel oscillation.
    let width = PI / (z + a + b + 1.0);
    let panels = (u_max / width).ceil() as usize;
    let width = u_max / panels as f64;
    let tol = 1e-11 / panels as f64;
    let integrand = |u: f64| u * bessel_j0(z * u) * bessel_j0(a * u) * bessel_j0(b * u) * (-0.5 * s * u * u).exp();
    let integral: f64 = (0..panels)
        .map(|i| integrate(integrand, i as f64 * width, (i + 1) as f64 * width, tol))
        .sum();
    let value = z * integral;
    if value < -NEGATIVE_DENSITY_TOL {
        return Err(PdfError::NegativeDensity { z, value });
    }
    Ok(value.max(0.0))
}

/// An envelope value above which the reference density is negligible.
pub fn envelope_upper_bound(p: &ChannelParams) -> f64 {
    let root = p.omega().sqrt();
    let sigma = (0.5 * p.diffuse_power() / p.omega()).sqrt();
    (p.v1() + p.v2()) / root + 9.0 * sigma
}

/// Reference CDF tabulated on a uniform grid and interpolated with cubic
/// Hermite segments (the density is the exact derivative at the nodes).
#[derive(Debug, Clone)]
pub struct EnvelopeCdf {
    step: f64,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl EnvelopeCdf {
    /// Tabulates on `[0, z_max]` with `intervals` Simpson panels.
    pub fn tabulate(p: &ChannelParams, z_max: f64, intervals: usize) -> Result<EnvelopeCdf, PdfError> {
        let intervals = intervals.max(1);
        let step = z_max / intervals as f64;
        let half_points: Vec<f64> = (0..=2 * intervals).map(|i| 0.5 * step * i as f64).collect();
        let dens = half_points
            .par_iter()
            .map(|&z| envelope_pdf_reference(p, z))
            .collect::<Result<Vec<f64>, PdfError>>()?;
        let mut cdf = Vec::with_capacity(intervals + 1);
        let mut pdf = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        pdf.push(dens[0]);
        for i in 0..intervals {
            acc += step / 6.0 * (dens[2 * i] + 4.0 * dens[2 * i + 1] + dens[2 * i + 2]);
            cdf.push(acc);
            pdf.push(dens[2 * i + 2]);
        }
        Ok(EnvelopeCdf { step, cdf, pdf })
    }

    /// Tabulates over the full support of `p`.
    pub fn for_params(p: &ChannelParams) -> Result<EnvelopeCdf, PdfError> {
        let z_max = envelope_upper_bound(p);
        let intervals = (z_max / 0.005).ceil() as usize;
        Self::tabulate(p, z_max, intervals)
    }

    pub fn z_max(&self) -> f64 {
        self.step * (self.cdf.len() - 1) as f64
    }

    /// Total mass of the tabulated range.
    pub fn total(&self) -> f64 {
        *self.cdf.last().expect("table is never empty")
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let pos = z / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return self.total();
        }
        let t = pos - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.cdf[i] + h10 * self.step * self.pdf[i] + h01 * self.cdf[i + 1] + h11 * self.step * self.pdf[i + 1]
    }
}

/// Rayleigh envelope density `2z·exp(−z²)` at unit power.
pub fn rayleigh_pdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        2.0 * z * (-z * z).exp()
    }
}

/// Rayleigh envelope CDF `1 − exp(−z²)` at unit power.
pub fn rayleigh_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        -(-z * z).exp_m1()
    }
}
