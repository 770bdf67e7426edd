//! Zero-order Bessel function of the first kind.
//!
//! Three regimes: the ascending series for `|x| <= 8`, Miller's backward
//! recurrence normalized by `J0 + 2ΣJ_2k = 1` up to `|x| = 25`, and the
//! Hankel asymptotic expansion beyond. The asymptotic series alone is only
//! good to about `e^{-2x}`, which is not enough near 8.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 25.0;

/// `J0(x)`, absolute error below 1e-10 for `|x| <= 1e4`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        miller(ax)
    } else {
        hankel(ax)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) || k > 200.0 {
            return sum;
        }
        k += 1.0;
    }
}

fn miller(x: f64) -> f64 {
    // Start well above x so the recurrence has forgotten its seed.
    let mut start = (x + 20.0 + (40.0 * x).sqrt()) as usize;
    start += start % 2;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j_cur;
        }
        if k - 1 == 0 {
            j0 = j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            j0 *= 1e-250;
        }
    }
    j0 / (norm + j0)
}

fn hankel(x: f64) -> f64 {
    // P ~ Σ (-1)^k a_{2k},  Q ~ Σ (-1)^{k+1} a_{2k+1},
    // a_k = Π_{m=1..k} (2m-1)² / (k! 8^k).
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let m = (2 * k - 1) as f64;
        a *= m * m / (k as f64 * 8.0 * x);
        if a > last {
            break;
        }
        last = a;
        match k % 4 {
            1 => q -= a,
            2 => p -= a,
            3 => q += a,
            _ => p += a,
        }
        if a < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
