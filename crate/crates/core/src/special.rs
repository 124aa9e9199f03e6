//! Thin wrappers over `statrs` special functions with the edge cases this
//! crate needs pinned down.

use std::f64::consts::SQRT_2;

use statrs::function::{erf, gamma as sgamma};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Regularized upper incomplete gamma Q(a, x); `Q(a, x) = 1` for `x <= 0`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        sgamma::gamma_ur(a, x)
    }
}

/// Standard normal survival function.
pub fn normal_sf(w: f64) -> f64 {
    0.5 * erf::erfc(w / SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(w: f64) -> f64 {
    0.5 * erf::erfc(-w / SQRT_2)
}
