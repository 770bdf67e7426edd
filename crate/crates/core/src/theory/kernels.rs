//! The `f_c` / `f_s` kernels of the sector-randomized diffuse model.
//!
//! For sector `m` of `N`, let `I_m(x)` be `(1/2π)∫ exp(j x cos γ) dγ` over
//! `[(2πm − π)/N, (2πm + π)/N]`. Then `f_c(x, N) = Σ (Re I_m)²` and
//! `f_s(x, N) = Σ (Im I_m)²`. Each `|I_m| <= 1/N`, hence
//! `f_c + f_s <= 1/N`.

use std::f64::consts::PI;

use super::quadrature::integrate;

/// Absolute tolerance of every sector integral.
pub const SECTOR_TOL: f64 = 1e-11;

fn sector_bounds(m: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let centre = 2.0 * PI * m as f64;
    ((centre - PI) / n, (centre + PI) / n)
}

/// `(Re I_m, Im I_m)` for sector `m` (1-based) of `n`.
pub fn sector_average(x: f64, m: usize, n: usize) -> (f64, f64) {
    let (a, b) = sector_bounds(m, n);
    let re = integrate(|g| (x * g.cos()).cos(), a, b, SECTOR_TOL);
    let im = integrate(|g| (x * g.cos()).sin(), a, b, SECTOR_TOL);
    (re / (2.0 * PI), im / (2.0 * PI))
}

/// Both kernels at once: `(f_c(x, n), f_s(x, n))`.
pub fn kernels(x: f64, n: usize) -> (f64, f64) {
    assert!(n >= 1, "kernel needs at least one sector");
    (1..=n).fold((0.0, 0.0), |(c, s), m| {
        let (re, im) = sector_average(x, m, n);
        (c + re * re, s + im * im)
    })
}

pub fn f_c(x: f64, n: usize) -> f64 {
    kernels(x, n).0
}

pub fn f_s(x: f64, n: usize) -> f64 {
    kernels(x, n).1
}
