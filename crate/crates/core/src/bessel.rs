//! Bessel function of the first kind, order one.

use std::f64::consts::PI;

/// Below this magnitude the power series is used; above it the Hankel
/// asymptotic expansion. At 12 the series loses under three digits to
/// cancellation and the asymptotic expansion is already below 1e-11.
const SERIES_LIMIT: f64 = 12.0;

/// `J₁(x)`.
pub fn j1(x: f64) -> f64 {
    if x < 0.0 {
        return -j1(-x);
    }
    if x < SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

/// `Σ_k (−1)^k (x/2)^{2k+1} / (k! (k+1)!)`
fn series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > half {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// Hankel expansion `J₁(x) ≈ √(2/(πx)) (P cos χ − Q sin χ)`, `χ = x − 3π/4`.
/// Summation stops at the smallest term.
fn asymptotic(x: f64) -> f64 {
    const MU: f64 = 4.0; // 4ν² for ν = 1
    let eight_x = 8.0 * x;
    // a_k = Π_{i=1..k} (μ − (2i−1)²) / (k! (8x)^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (MU - odd * odd) / (k as f64 * eight_x);
        if a.abs() >= last {
            break;
        }
        last = a.abs();
        // even k feed P with sign (−1)^{k/2}; odd k feed Q with sign (−1)^{(k−1)/2}
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
