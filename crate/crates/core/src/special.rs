//! Special functions used by the angle and exponent computations.
//!
//! Error functions come from the `errorfunctions` crate (a port of the
//! Faddeeva package); everything here is arranged to stay finite where the
//! naive formula would underflow or overflow.

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

pub const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// `exp(x²) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    x.erfcx()
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

/// `ln erf(x)` for `x > 0`.
pub fn ln_erf(x: f64) -> f64 {
    if x > 0.5 {
        (-erfc(x)).ln_1p()
    } else {
        erf(x).ln()
    }
}

/// `G'(x) / G(x)` with `G = erf`, i.e. `(2/√π) e^{-x²} / erf(x)`, for `x > 0`.
pub fn erf_log_derivative(x: f64) -> f64 {
    if x < 1e-8 {
        // erf(x) ≈ 2x/√π (1 - x²/3)
        return 1.0 / x - 2.0 * x / 3.0;
    }
    FRAC_2_SQRT_PI * (-x * x).exp() / erf(x)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse Mills ratio `φ(s)/Φ(s)` of the standard normal.
pub fn normal_hazard(s: f64) -> f64 {
    if s < 0.0 {
        SQRT_2_OVER_PI / erfcx(-s / SQRT_2)
    } else {
        norm_pdf(s) / norm_cdf(s)
    }
}

/// Cumulant generating function of the standard half-normal `|N(0,1)|`:
/// `ln E e^{s|N|} = s²/2 + ln(2Φ(s))`.
pub fn half_normal_cgf(s: f64) -> f64 {
    if s < 0.0 {
        erfcx(-s / SQRT_2).ln()
    } else {
        0.5 * s * s + (2.0 - erfc(s / SQRT_2)).ln()
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln C(n, k)` through log-gamma; accepts non-integer `n` and `k`.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Natural-log binary entropy, zero at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub const LN_PI: f64 = 1.144_729_885_849_400_2;
