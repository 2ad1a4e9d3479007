//! Shared helpers for the integration suite.
//!
//! The double-exponential (tanh-sinh) rule here is the independent oracle:
//! a different algorithm family from the adaptive Gauss-Kronrod engine
//! inside the crate, so agreement is evidence rather than tautology.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Truncation of the u-axis; the weights beyond are below 1e-25.
const U_MAX: f64 = 3.7;

/// Tanh-sinh quadrature on `[lo, hi]`. Handles integrable endpoint
/// singularities; refuses nothing, so only use it where the integral
/// exists. Converges to ~1e-12 relative on the integrands in this suite.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let center = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let mut prev = f64::NAN;
    for level in 2..=12u32 {
        let n = 1i64 << level;
        let h = U_MAX / n as f64;
        let mut sum = 0.0;
        for j in -n..=n {
            let u = j as f64 * h;
            let su = FRAC_PI_2 * u.sinh();
            let x = su.tanh();
            let w = FRAC_PI_2 * u.cosh() / (su.cosh() * su.cosh());
            let y = f(center + scale * x);
            // Points can saturate onto a singular endpoint; their true
            // weight is negligible there.
            if y.is_finite() {
                sum += w * y;
            }
        }
        let value = sum * h * scale;
        if (value - prev).abs() <= 1e-13 * value.abs().max(1.0) {
            return value;
        }
        prev = value;
    }
    prev
}

/// Tanh-sinh with interior split points (the rule only tolerates
/// singular behavior at panel endpoints).
pub fn tanh_sinh_split<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, cuts: &[f64]) -> f64 {
    let mut edges = vec![lo];
    edges.extend(cuts.iter().copied().filter(|c| *c > lo && *c < hi));
    edges.push(hi);
    edges.windows(2).map(|w| tanh_sinh(f, w[0], w[1])).sum()
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}
